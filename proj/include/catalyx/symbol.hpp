#pragma once

// Algebraic well-posedness check for the frozen-coefficient half-space
// problem: assembly of the N x N boundary symbol matrix that mixes conserved
// rows with scaled surface-stoichiometry rows, an invertibility certificate
// based on the singular value spectrum, the standalone hypotheses of the
// structural invertibility lemma, and a sweep driver over (lambda, xi').

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "catalyx/network.hpp"
#include "catalyx/rational.hpp"

namespace catalyx {

struct BoundarySymbolInstance {
  std::complex<double> lambda{1.0, 0.0};
  double xi_norm_sq = 0.0;  // |xi'|^2
  double mu_shift = 0.0;    // damping constant
  Eigen::VectorXd d;        // diffusion coefficients
  Eigen::VectorXd c_star;   // boundary trace of the reference state, > 0
  std::vector<std::vector<long long>> nu_sigma;
  std::vector<std::vector<long long>> e;
  double sector_phi = std::numbers::pi / 4;  // admissible |arg lambda| <= pi - phi
};

/// Diagonal scaling delta_i = 1 / (d_i conj(r_i) c*_i) applied to the
/// surface-stoichiometry rows, with r_i the principal square root of
/// (lambda + mu)/d_i + |xi'|^2. For lambda in the sector every entry has
/// strictly positive real part.
inline Eigen::VectorXcd symbol_scaling_diagonal(const BoundarySymbolInstance& inst) {
  const int n = static_cast<int>(inst.d.size());
  Eigen::VectorXcd delta(n);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> radicand =
        (inst.lambda + inst.mu_shift) / inst.d[i] + inst.xi_norm_sq;
    const std::complex<double> r = std::sqrt(radicand);  // principal branch, Re >= 0
    delta[i] = 1.0 / (inst.d[i] * std::conj(r) * inst.c_star[i]);
  }
  return delta;
}

inline void validate_symbol_instance(const BoundarySymbolInstance& inst) {
  const int n = static_cast<int>(inst.d.size());
  if (inst.c_star.size() != n) throw ShapeMismatch("boundary symbol: c_star size mismatch");
  if (static_cast<int>(inst.nu_sigma.size() + inst.e.size()) != n)
    throw ShapeMismatch("boundary symbol: row count must equal species count");
  for (int i = 0; i < n; ++i) {
    if (!(inst.d[i] > 0.0)) throw std::domain_error("boundary symbol: d must be positive");
    if (!(inst.c_star[i] > 0.0)) throw std::domain_error("boundary symbol: c_star must be positive");
  }
  if (inst.xi_norm_sq < 0.0) throw std::domain_error("boundary symbol: |xi'|^2 must be >= 0");
  const double mag = std::abs(inst.lambda);
  if (mag == 0.0 && inst.xi_norm_sq == 0.0 && inst.mu_shift == 0.0)
    throw std::domain_error("boundary symbol: (lambda, xi') = (0, 0) with mu = 0");
  if (mag > 0.0) {
    const double limit = std::numbers::pi - inst.sector_phi;
    if (std::abs(std::arg(inst.lambda)) > limit + 1e-12)
      throw std::domain_error("boundary symbol: lambda outside the configured sector");
  }
}

/// N x N matrix whose invertibility is equivalent to unique solvability of
/// the transformed boundary system: n_sigma conserved rows e^k stacked over
/// m_sigma rows (c*)^{nu_a} diag(delta) nu^a.
inline Eigen::MatrixXcd assemble_boundary_matrix(const BoundarySymbolInstance& inst) {
  validate_symbol_instance(inst);
  const int n = static_cast<int>(inst.d.size());
  const int n_cons = static_cast<int>(inst.e.size());
  const Eigen::VectorXcd delta = symbol_scaling_diagonal(inst);
  Eigen::MatrixXcd m(n, n);
  for (int k = 0; k < n_cons; ++k)
    for (int i = 0; i < n; ++i) m(k, i) = static_cast<double>(inst.e[k][i]);
  for (int a = 0; a < static_cast<int>(inst.nu_sigma.size()); ++a) {
    const double cpow = monomial(inst.c_star, inst.nu_sigma[a]);
    for (int i = 0; i < n; ++i)
      m(n_cons + a, i) = cpow * delta[i] * static_cast<double>(inst.nu_sigma[a][i]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Invertibility certificate

enum class Certificate { invertible, singular, indeterminate };

inline const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::invertible: return "invertible";
    case Certificate::singular: return "singular";
    default: return "indeterminate";
  }
}

/// SVD-based certificate: `invertible` when sigma_min > margin * sigma_max,
/// `singular` when sigma_min < margin * sigma_max / 100, else indeterminate.
inline Certificate certify_invertible(const Eigen::MatrixXcd& m, double margin = 1e-8,
                                      int max_dim = 64) {
  if (m.rows() != m.cols()) throw ShapeMismatch("certify_invertible: matrix must be square");
  if (m.rows() > max_dim) throw std::invalid_argument("certify_invertible: dimension above limit");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(m.rows() - 1);
  if (smax == 0.0) return Certificate::singular;
  if (smin > margin * smax) return Certificate::invertible;
  if (smin < margin * smax / 100.0) return Certificate::singular;
  return Certificate::indeterminate;
}

// ---------------------------------------------------------------------------
// Lemma hypotheses

namespace detail {

/// Distance from the origin to the convex hull of points in the plane;
/// 0 when the origin lies in the hull (boundary included). Hull orientation
/// predicates run in exact rational arithmetic on the binary values of the
/// inputs.
inline double origin_hull_distance(const std::vector<std::complex<double>>& pts) {
  using exact::Rational;
  const std::size_t n = pts.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  std::vector<std::pair<Rational, Rational>> p;
  p.reserve(n);
  for (const auto& z : pts) p.emplace_back(Rational(z.real()), Rational(z.imag()));

  auto cross = [](const std::pair<Rational, Rational>& o, const std::pair<Rational, Rational>& a,
                  const std::pair<Rational, Rational>& b) -> Rational {
    return Rational((a.first - o.first) * (b.second - o.second) -
                    (a.second - o.second) * (b.first - o.first));
  };

  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  std::vector<std::pair<Rational, Rational>> hull;
  if (p.size() == 1) {
    hull = p;
  } else {
    // Andrew monotone chain, collinear points dropped.
    std::vector<std::pair<Rational, Rational>> lower, upper;
    for (const auto& q : p) {
      while (lower.size() >= 2 && cross(lower[lower.size() - 2], lower.back(), q) <= 0)
        lower.pop_back();
      lower.push_back(q);
    }
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
      while (upper.size() >= 2 && cross(upper[upper.size() - 2], upper.back(), *it) <= 0)
        upper.pop_back();
      upper.push_back(*it);
    }
    lower.pop_back();
    upper.pop_back();
    hull = lower;
    hull.insert(hull.end(), upper.begin(), upper.end());
  }

  const std::pair<Rational, Rational> origin{Rational(0), Rational(0)};
  auto seg_dist = [&](const std::pair<Rational, Rational>& a,
                      const std::pair<Rational, Rational>& b) {
    const double ax = a.first.get_d(), ay = a.second.get_d();
    const double bx = b.first.get_d(), by = b.second.get_d();
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? (-(ax * dx + ay * dy)) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = ax + t * dx, py = ay + t * dy;
    return std::hypot(px, py);
  };

  if (hull.size() == 1) {
    if (hull[0] == origin) return 0.0;
    return std::hypot(hull[0].first.get_d(), hull[0].second.get_d());
  }
  if (hull.size() == 2) {
    // Degenerate hull: a segment. Origin on it means containment.
    const auto c = cross(hull[0], hull[1], origin);
    if (c == 0) {
      const Rational t1 = (origin.first - hull[0].first) * (hull[1].first - hull[0].first) +
                          (origin.second - hull[0].second) * (hull[1].second - hull[0].second);
      const Rational t2 = (hull[1].first - hull[0].first) * (hull[1].first - hull[0].first) +
                          (hull[1].second - hull[0].second) * (hull[1].second - hull[0].second);
      if (t1 >= 0 && t1 <= t2) return 0.0;
    }
    return seg_dist(hull[0], hull[1]);
  }
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, origin) < 0) {
      inside = false;
      break;
    }
  }
  if (inside) return 0.0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i)
    dist = std::min(dist, seg_dist(hull[i], hull[(i + 1) % hull.size()]));
  return dist;
}

}  // namespace detail

/// True iff the v's and w's are each linearly independent, mutually orthogonal
/// (exact arithmetic on the binary values of the inputs), and the origin stays
/// farther than hull_margin * max|delta| from the convex hull of the deltas.
inline bool lemma_invertibility_hypotheses(const std::vector<Eigen::VectorXd>& v,
                                           const std::vector<Eigen::VectorXd>& w,
                                           const std::vector<std::complex<double>>& delta,
                                           double hull_margin = 0.0) {
  const std::size_t n = delta.size();
  if (v.size() + w.size() != n)
    throw ShapeMismatch("lemma hypotheses: m + s must equal the number of deltas");
  for (const auto& x : v)
    if (static_cast<std::size_t>(x.size()) != n) throw ShapeMismatch("lemma hypotheses: v length");
  for (const auto& x : w)
    if (static_cast<std::size_t>(x.size()) != n) throw ShapeMismatch("lemma hypotheses: w length");

  auto to_exact = [n](const std::vector<Eigen::VectorXd>& vs) {
    exact::RationalMatrix m;
    for (const auto& x : vs) {
      exact::RationalVector row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = exact::Rational(x[static_cast<int>(j)]);
      m.push_back(std::move(row));
    }
    return m;
  };
  const auto ve = to_exact(v);
  const auto we = to_exact(w);
  if (!v.empty() && exact::rank(ve) < v.size()) return false;
  if (!w.empty() && exact::rank(we) < w.size()) return false;
  for (const auto& a : ve)
    for (const auto& b : we)
      if (exact::dot(a, b) != 0) return false;

  double max_mod = 0.0;
  for (const auto& z : delta) max_mod = std::max(max_mod, std::abs(z));
  const double dist = detail::origin_hull_distance(delta);
  return dist > hull_margin * max_mod && dist > 0.0;
}

/// The lemma's matrix: rows (diag(delta) v^i)^T stacked over rows (w^j)^T.
inline Eigen::MatrixXcd lemma_matrix(const std::vector<Eigen::VectorXd>& v,
                                     const std::vector<Eigen::VectorXd>& w,
                                     const std::vector<std::complex<double>>& delta) {
  const int n = static_cast<int>(delta.size());
  if (static_cast<int>(v.size() + w.size()) != n)
    throw ShapeMismatch("lemma_matrix: m + s must equal N");
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    for (int j = 0; j < n; ++j) m(i, j) = delta[j] * v[i][j];
  for (int i = 0; i < static_cast<int>(w.size()); ++i)
    for (int j = 0; j < n; ++j) m(static_cast<int>(v.size()) + i, j) = w[i][j];
  return m;
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepPlan {
  double lambda_mag_min = 1e-3;
  double lambda_mag_max = 1e6;
  int lambda_mag_count = 10;
  int angle_count = 9;
  double xi_sq_min = 1e-3;
  double xi_sq_max = 1e6;
  int xi_sq_count = 11;
  bool include_zero_xi = true;
  double mu_shift = 0.0;
  double margin = 1e-8;
};

struct SweepWitness {
  std::complex<double> lambda;
  double xi_norm_sq = 0.0;
  int sample_index = -1;
  Certificate verdict = Certificate::invertible;
};

struct SweepReport {
  bool pass = false;
  double min_scaled_singular_value = 0.0;  // min over samples of sigma_min/sigma_max
  SweepWitness worst;                      // sample attaining the minimum
  int samples_total = 0;
  int samples_singular = 0;
  int samples_indeterminate = 0;
  double margin = 0.0;
};

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> v;
  if (count <= 1) {
    v.push_back(lo);
    return v;
  }
  const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) v.push_back(std::pow(10.0, std::log10(lo) + i * step));
  return v;
}

/// Certifies the boundary matrix over a log grid of |lambda| x sector angles
/// x |xi'|^2 for a fixed coefficient bundle. A pass is evidence, not proof,
/// of well-posedness for the frozen-coefficient problem. Reduction order is
/// fixed: min by scaled singular value with ties resolved by sample index.
inline SweepReport ls_sweep_instance(BoundarySymbolInstance inst, const SweepPlan& plan = {}) {
  inst.mu_shift = plan.mu_shift;
  const auto mags = log_spaced(plan.lambda_mag_min, plan.lambda_mag_max, plan.lambda_mag_count);
  std::vector<double> xis;
  if (plan.include_zero_xi) xis.push_back(0.0);
  for (double x : log_spaced(plan.xi_sq_min, plan.xi_sq_max, plan.xi_sq_count)) xis.push_back(x);
  const double max_angle = std::numbers::pi - inst.sector_phi;

  SweepReport rep;
  rep.margin = plan.margin;
  rep.min_scaled_singular_value = std::numeric_limits<double>::infinity();
  int index = 0;
  for (double mag : mags) {
    for (int ia = 0; ia < plan.angle_count; ++ia) {
      const double theta = plan.angle_count == 1
                               ? 0.0
                               : -max_angle + 2.0 * max_angle * ia / (plan.angle_count - 1);
      inst.lambda = std::polar(mag, theta);
      for (double xi : xis) {
        inst.xi_norm_sq = xi;
        const Eigen::MatrixXcd m = assemble_boundary_matrix(inst);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(m.rows() - 1);
        const double scaled = smax > 0.0 ? smin / smax : 0.0;
        const Certificate verdict = scaled > plan.margin
                                        ? Certificate::invertible
                                        : (scaled < plan.margin / 100.0 ? Certificate::singular
                                                                        : Certificate::indeterminate);
        if (verdict == Certificate::singular) ++rep.samples_singular;
        if (verdict == Certificate::indeterminate) ++rep.samples_indeterminate;
        if (scaled < rep.min_scaled_singular_value) {
          rep.min_scaled_singular_value = scaled;
          rep.worst = {inst.lambda, xi, index, verdict};
        }
        ++index;
      }
    }
  }
  rep.samples_total = index;
  rep.pass = rep.samples_singular == 0 && rep.samples_indeterminate == 0;
  return rep;
}

/// Sweep with the coefficient bundle taken from a validated network: d and
/// surface stoichiometry from the model, conserved rows from its orthogonal
/// complement, trace c_star from the caller.
inline SweepReport ls_sweep(const ReactionNetwork& net, const Eigen::VectorXd& c_star,
                            double sector_phi, const SweepPlan& plan = {}) {
  BoundarySymbolInstance inst;
  inst.d = net.d;
  inst.c_star = c_star;
  inst.sector_phi = sector_phi;
  for (const auto& r : net.surface_reactions) inst.nu_sigma.push_back(r.nu);
  inst.e = conserved_basis(net).e;
  return ls_sweep_instance(std::move(inst), plan);
}

}  // namespace catalyx
