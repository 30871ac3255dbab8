#pragma once

// Chemical model definition and validation: species, bulk mass-action
// reactions, surface stoichiometry, conserved quantities, and the
// initial-data compatibility checks used before a run.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "catalyx/errors.hpp"
#include "catalyx/grid.hpp"
#include "catalyx/rational.hpp"

namespace catalyx {

inline constexpr double kDefaultPositivityFloor = 1e-14;

struct BulkReaction {
  std::vector<long long> alpha;  // educt exponents
  std::vector<long long> beta;   // product exponents
  double kf = 1.0;
  double kb = 1.0;

  /// Stoichiometric vector beta - alpha, recomputed on demand.
  std::vector<long long> nu() const {
    std::vector<long long> v(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) v[i] = beta[i] - alpha[i];
    return v;
  }
};

struct SurfaceReaction {
  std::vector<long long> nu;  // net surface stoichiometry
};

struct ReactionNetwork {
  std::vector<std::string> species_names;
  Eigen::VectorXd d;    // diffusion coefficients, one per species
  Eigen::VectorXd mu0;  // reference chemical potentials
  std::vector<BulkReaction> bulk_reactions;
  std::vector<SurfaceReaction> surface_reactions;

  int species_count() const { return static_cast<int>(species_names.size()); }
  int bulk_count() const { return static_cast<int>(bulk_reactions.size()); }
  int surface_count() const { return static_cast<int>(surface_reactions.size()); }
  int conserved_count() const { return species_count() - surface_count(); }
};

/// Integer basis of the orthogonal complement of the surface stoichiometric
/// vectors, plus (when one exists) a strictly positive vector orthogonal to
/// bulk and surface stoichiometry alike.
struct ConservedBasis {
  std::vector<std::vector<long long>> e;
  std::optional<std::vector<long long>> positive_combination;
};

struct EquilibriumConstants {
  Eigen::VectorXd kappa;
};

/// kappa_a = exp(-nu_sigma_a . mu0)
inline EquilibriumConstants equilibrium_constants(const ReactionNetwork& net) {
  EquilibriumConstants k;
  k.kappa.resize(net.surface_count());
  for (int a = 0; a < net.surface_count(); ++a) {
    double s = 0.0;
    for (int i = 0; i < net.species_count(); ++i)
      s += static_cast<double>(net.surface_reactions[a].nu[i]) * net.mu0[i];
    k.kappa[a] = std::exp(-s);
  }
  return k;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind {
    structure,
    nonpositive_diffusion,
    nonpositive_rate_constant,
    detailed_balance,
    surface_dependence,
    too_many_surface_reactions,
  };
  Kind kind;
  int index = -1;      // reaction or species index, when applicable
  double defect = 0.0; // measured magnitude of the violation
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool clean() const { return violations.empty(); }
};

/// Checks every network invariant; violations are data, not failures.
/// Detailed balance is enforced as ln(kf/kb) + nu . mu0 = 0, the convention
/// under which surface equilibria c^nu = kappa and bulk equilibria coincide
/// with vanishing affinities mu0 + ln c.
inline ValidationReport validate_network(const ReactionNetwork& net, double tol) {
  ValidationReport rep;
  const int n = net.species_count();
  auto add = [&](Violation::Kind kind, int idx, double defect, std::string detail) {
    rep.violations.push_back({kind, idx, defect, std::move(detail)});
  };

  if (net.d.size() != n || net.mu0.size() != n) {
    add(Violation::Kind::structure, -1, 0.0, "d/mu0 length differs from species count");
    return rep;
  }
  for (const auto& r : net.bulk_reactions) {
    if (static_cast<int>(r.alpha.size()) != n || static_cast<int>(r.beta.size()) != n) {
      add(Violation::Kind::structure, -1, 0.0, "bulk reaction exponent length mismatch");
      return rep;
    }
  }
  for (const auto& r : net.surface_reactions) {
    if (static_cast<int>(r.nu.size()) != n) {
      add(Violation::Kind::structure, -1, 0.0, "surface reaction stoichiometry length mismatch");
      return rep;
    }
  }

  for (int i = 0; i < n; ++i)
    if (!(net.d[i] > 0.0))
      add(Violation::Kind::nonpositive_diffusion, i, net.d[i],
          "diffusion coefficient of species " + net.species_names[i]);

  for (int a = 0; a < net.bulk_count(); ++a) {
    const auto& r = net.bulk_reactions[a];
    if (!(r.kf > 0.0) || !(r.kb > 0.0)) {
      add(Violation::Kind::nonpositive_rate_constant, a, std::min(r.kf, r.kb),
          "rate constants must be positive");
      continue;
    }
    const auto nu = r.nu();
    double nu_mu = 0.0;
    for (int i = 0; i < n; ++i) nu_mu += static_cast<double>(nu[i]) * net.mu0[i];
    const double defect = std::abs(std::log(r.kf / r.kb) + nu_mu);
    if (defect > tol)
      add(Violation::Kind::detailed_balance, a, defect, "detailed balance defect");
  }

  if (net.surface_count() > n)
    add(Violation::Kind::too_many_surface_reactions, -1,
        static_cast<double>(net.surface_count() - n), "more surface reactions than species");
  if (net.surface_count() > 0 && net.surface_count() <= n) {
    std::vector<std::vector<long long>> rows;
    for (const auto& r : net.surface_reactions) rows.push_back(r.nu);
    auto m = exact::from_integer_rows(rows, n);
    const std::size_t rk = exact::rank(std::move(m));
    if (rk < static_cast<std::size_t>(net.surface_count()))
      add(Violation::Kind::surface_dependence, -1,
          static_cast<double>(net.surface_count() - rk),
          "surface stoichiometric vectors are linearly dependent");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Conserved quantities

/// Integer basis of the orthogonal complement of the surface stoichiometry
/// (exact arithmetic) and, when it exists, a strictly positive conserved
/// vector for both bulk and surface chemistry.
inline ConservedBasis conserved_basis(const ReactionNetwork& net) {
  const std::size_t n = static_cast<std::size_t>(net.species_count());
  std::vector<std::vector<long long>> surface_rows;
  for (const auto& r : net.surface_reactions) surface_rows.push_back(r.nu);
  {
    auto m = exact::from_integer_rows(surface_rows, n);
    if (exact::rank(std::move(m)) < surface_rows.size())
      throw std::invalid_argument(
          "conserved_basis: surface stoichiometric vectors are rank deficient");
  }

  ConservedBasis basis;
  auto ns = exact::null_space(exact::from_integer_rows(surface_rows, n), n);
  for (const auto& v : ns) basis.e.push_back(exact::to_primitive_integer(v));

  std::vector<std::vector<long long>> joint_rows = surface_rows;
  for (const auto& r : net.bulk_reactions) joint_rows.push_back(r.nu());
  auto joint_ns = exact::null_space(exact::from_integer_rows(joint_rows, n), n);
  if (auto pos = exact::positive_combination(joint_ns, n)) basis.positive_combination = *pos;
  return basis;
}

// ---------------------------------------------------------------------------
// Rates and surface residuals

/// x^p with the mass-action convention 0^0 = 1; p may be negative.
inline double int_pow(double x, long long p) {
  if (p == 0) return 1.0;
  const bool neg = p < 0;
  unsigned long long e = neg ? static_cast<unsigned long long>(-p) : static_cast<unsigned long long>(p);
  double base = x, acc = 1.0;
  while (e) {
    if (e & 1ull) acc *= base;
    base *= base;
    e >>= 1;
  }
  return neg ? 1.0 / acc : acc;
}

inline double monomial(const Eigen::VectorXd& c, const std::vector<long long>& expo) {
  double m = 1.0;
  for (int i = 0; i < c.size(); ++i) m *= int_pow(c[i], expo[i]);
  return m;
}

/// Total bulk production rate r(c) = sum_a (kf c^alpha - kb c^beta) nu^a.
inline Eigen::VectorXd bulk_rate(const ReactionNetwork& net, const Eigen::VectorXd& c) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(net.species_count());
  for (const auto& rx : net.bulk_reactions) {
    const double rate = rx.kf * monomial(c, rx.alpha) - rx.kb * monomial(c, rx.beta);
    const auto nu = rx.nu();
    for (int i = 0; i < net.species_count(); ++i) r[i] += rate * static_cast<double>(nu[i]);
  }
  return r;
}

/// Surface constraint residual: component a is c^{nu_sigma_a} - kappa_a.
/// `location` only labels the DegenerateConcentration error.
inline Eigen::VectorXd surface_residual(const ReactionNetwork& net,
                                        const EquilibriumConstants& kappa,
                                        const Eigen::VectorXd& c_bdry,
                                        double floor = kDefaultPositivityFloor,
                                        int location = -1) {
  const int n = net.species_count();
  for (int i = 0; i < n; ++i) {
    bool needs_positive = false;
    for (const auto& r : net.surface_reactions)
      if (r.nu[i] < 0) needs_positive = true;
    if (needs_positive && c_bdry[i] <= floor)
      throw DegenerateConcentration(i, location, c_bdry[i]);
  }
  Eigen::VectorXd res(net.surface_count());
  for (int a = 0; a < net.surface_count(); ++a)
    res[a] = monomial(c_bdry, net.surface_reactions[a].nu) - kappa.kappa[a];
  return res;
}

// ---------------------------------------------------------------------------
// Initial-data compatibility

struct FaceCompatibility {
  int face = 0;
  double surface_residual_max = 0.0;  // max_a |c^{nu_a} - kappa_a| at the boundary cell
  double flux_defect_max = 0.0;       // max_k |e^k . D dc/dn| by one-sided difference
  double min_concentration = 0.0;     // over the boundary cell
};

struct CompatibilityReport {
  std::vector<FaceCompatibility> faces;
  double min_concentration = 0.0;  // over all cells
  double max_surface_residual = 0.0;
  double max_flux_defect = 0.0;
  bool positivity_ok = true;

  bool clean(double tol) const {
    return positivity_ok && max_surface_residual <= tol && max_flux_defect <= tol;
  }
};

/// Discrete analogue of the initial-data admissibility set: surface
/// equilibrium and zero conserved flux at every boundary cell, plus strict
/// positivity. Defects are measured, never thrown.
inline CompatibilityReport check_compatibility(const ReactionNetwork& net,
                                               const EquilibriumConstants& kappa,
                                               const Grid& grid, const StateField& c0,
                                               double floor = kDefaultPositivityFloor) {
  CompatibilityReport rep;
  rep.min_concentration = c0.c.size() > 0 ? c0.c.minCoeff() : 0.0;
  rep.positivity_ok = rep.min_concentration > floor;
  const auto erows = conserved_basis(net).e;

  for (const auto& f : grid.boundary_faces()) {
    FaceCompatibility fc;
    fc.face = f.id;
    const Eigen::VectorXd cb = c0.c.col(f.cell);
    fc.min_concentration = cb.minCoeff();

    for (int a = 0; a < net.surface_count(); ++a) {
      bool degenerate = false;
      for (int i = 0; i < net.species_count(); ++i)
        if (net.surface_reactions[a].nu[i] < 0 && cb[i] <= floor) degenerate = true;
      const double res = degenerate
                             ? std::numeric_limits<double>::infinity()
                             : std::abs(monomial(cb, net.surface_reactions[a].nu) - kappa.kappa[a]);
      fc.surface_residual_max = std::max(fc.surface_residual_max, res);
    }

    const int nb = grid.neighbor(f.cell, f.axis, -f.side);
    const double h = grid.h(f.axis);
    const Eigen::VectorXd dn = (cb - c0.c.col(nb)) / h;  // one-sided, outward
    for (const auto& e : erows) {
      double v = 0.0;
      for (int i = 0; i < net.species_count(); ++i)
        v += static_cast<double>(e[i]) * net.d[i] * dn[i];
      fc.flux_defect_max = std::max(fc.flux_defect_max, std::abs(v));
    }

    rep.max_surface_residual = std::max(rep.max_surface_residual, fc.surface_residual_max);
    rep.max_flux_defect = std::max(rep.max_flux_defect, fc.flux_defect_max);
    rep.faces.push_back(fc);
  }
  return rep;
}

}  // namespace catalyx
