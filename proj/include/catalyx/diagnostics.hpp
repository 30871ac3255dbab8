#pragma once

// Per-step evaluation of the a-priori quantities: the conserved L1
// functional, the entropy functional with its diffusive and reactive
// dissipation terms, L2 accumulation, and boundary-defect measures. Spatial
// quadrature is midpoint on cells; gradients live on faces (central across
// interior faces, one-sided at boundary faces).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "catalyx/grid.hpp"
#include "catalyx/network.hpp"

namespace catalyx {

struct DiagnosticsRecord {
  double t = 0.0;
  double mass_e = std::numeric_limits<double>::quiet_NaN();  // NaN when no positive e exists
  double entropy = 0.0;
  double diffusive_dissipation = 0.0;
  double reactive_dissipation = 0.0;
  double l2_sq = 0.0;
  double max_norm = 0.0;
  double min_concentration = 0.0;
  double boundary_flux_defect = 0.0;
  double boundary_equilibrium_defect = 0.0;
  int newton_iters = 0;
  // Not part of the CSV schema:
  double l1 = 0.0;                 // integral of sum_i c_i
  bool dissipation_skipped = false;  // some cells/faces below the floor were skipped
};

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Evaluates every diagnostic field except t and newton_iters.
inline DiagnosticsRecord evaluate(const ReactionNetwork& net, const ConservedBasis& basis,
                                  const Grid& grid, const StateField& state,
                                  const BoundaryState& bdry,
                                  double floor = kDefaultPositivityFloor) {
  const int n = net.species_count();
  const double vol = grid.cell_volume();
  DiagnosticsRecord rec;
  rec.min_concentration = std::numeric_limits<double>::infinity();

  const EquilibriumConstants kappa = equilibrium_constants(net);

  double mass = 0.0, l1 = 0.0, entropy = 0.0, l2 = 0.0, react = 0.0;
  const bool have_e = basis.positive_combination.has_value();
  for (int j = 0; j < grid.cell_count(); ++j) {
    const Eigen::VectorXd c = state.c.col(j);
    for (int i = 0; i < n; ++i) {
      const double ci = c[i];
      l1 += ci * vol;
      entropy += (ci * (net.mu0[i] - 1.0) + xlogx(ci)) * vol;
      l2 += ci * ci * vol;
      rec.max_norm = std::max(rec.max_norm, std::abs(ci));
      rec.min_concentration = std::min(rec.min_concentration, ci);
      if (have_e) mass += static_cast<double>((*basis.positive_combination)[i]) * ci * vol;
    }
    for (const auto& rx : net.bulk_reactions) {
      const auto nu = rx.nu();
      bool skip = false;
      for (int i = 0; i < n; ++i)
        if (nu[i] != 0 && c[i] < floor) skip = true;
      if (skip) {
        rec.dissipation_skipped = true;
        continue;
      }
      double affinity = 0.0;
      for (int i = 0; i < n; ++i)
        if (nu[i] != 0) affinity += static_cast<double>(nu[i]) * (net.mu0[i] + std::log(c[i]));
      react += rx.kf * monomial(c, rx.alpha) * affinity * std::expm1(affinity) * vol;
    }
  }
  rec.mass_e = have_e ? mass : std::numeric_limits<double>::quiet_NaN();
  rec.l1 = l1;
  rec.entropy = entropy;
  rec.l2_sq = l2;
  rec.reactive_dissipation = react;

  // Diffusive dissipation: sum over faces of d_i grad^2 / c_face with
  // trapezoid-consistent weights (full cell spacing across interior faces,
  // half at boundary faces).
  double diff = 0.0;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const double h = grid.h(axis);
    for (int j = 0; j < grid.cell_count(); ++j) {
      const int nb = grid.neighbor(j, axis, +1);
      if (nb < 0) continue;
      const double w = (grid.dim() == 1 ? 1.0 : grid.h(1 - axis)) * h;
      for (int i = 0; i < n; ++i) {
        const double grad = (state.c(i, nb) - state.c(i, j)) / h;
        const double cf = 0.5 * (state.c(i, nb) + state.c(i, j));
        if (cf < floor) {
          if (grad != 0.0) rec.dissipation_skipped = true;
          continue;
        }
        diff += net.d[i] * grad * grad / cf * w;
      }
    }
  }
  for (const auto& f : grid.boundary_faces()) {
    const double h = grid.h(f.axis);
    const double w = grid.face_area(f) * h / 2.0;
    for (int i = 0; i < n; ++i) {
      const double grad = (bdry.b(i, f.id) - state.c(i, f.cell)) / (h / 2.0);
      const double cf = bdry.b(i, f.id);
      if (cf < floor) {
        if (grad != 0.0) rec.dissipation_skipped = true;
        continue;
      }
      diff += net.d[i] * grad * grad / cf * w;
    }
  }
  rec.diffusive_dissipation = diff;

  for (const auto& f : grid.boundary_faces()) {
    const double two_over_h = 2.0 / grid.h(f.axis);
    for (const auto& e : basis.e) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        v += static_cast<double>(e[i]) * net.d[i] *
             (state.c(i, f.cell) - bdry.b(i, f.id)) * two_over_h;
      rec.boundary_flux_defect = std::max(rec.boundary_flux_defect, std::abs(v));
    }
    for (int a = 0; a < net.surface_count(); ++a) {
      const auto& nu = net.surface_reactions[a].nu;
      bool degenerate = false;
      for (int i = 0; i < n; ++i)
        if (nu[i] < 0 && bdry.b(i, f.id) <= floor) degenerate = true;
      const double defect =
          degenerate ? std::numeric_limits<double>::infinity()
                     : std::abs(monomial(bdry.b.col(f.id), nu) - kappa.kappa[a]);
      rec.boundary_equilibrium_defect = std::max(rec.boundary_equilibrium_defect, defect);
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Bound checks over a trajectory

struct BoundTolerances {
  double mass_rel = 1e-8;      // relative drift of the conserved functional
  double entropy_step = 1e-10; // per-step slack for monotonicity
};

struct BoundsReport {
  bool mass_available = false;
  double mass_drift_rel_max = 0.0;
  bool mass_ok = true;

  double l1_constant = 1.0;  // max_i e_i / min_i e_i
  double l1_worst_ratio = 0.0;
  bool l1_bound_ok = true;

  double entropy_increase_max = 0.0;  // most positive per-step entropy change
  bool entropy_monotone_ok = true;

  std::vector<double> entropy_identity_residual;  // per record, trapezoidal time quadrature
  double entropy_identity_max = 0.0;

  double time_integrated_max_norm = 0.0;
  double time_integrated_l2_sq = 0.0;
  bool accumulations_finite = true;
};

/// Verifies the a-priori bounds along a trajectory: conservation of the
/// positive functional, the L1 bound with constant max e / min e, the entropy
/// identity residual (reported, expected O(dt + h^2)), and per-step entropy
/// monotonicity. The time-integrated max-norm and L2 accumulations are
/// monitored for finiteness only; their continuous constants are not
/// computable from the analysis.
inline BoundsReport check_bounds(const std::vector<DiagnosticsRecord>& trajectory,
                                 const ConservedBasis& basis, const BoundTolerances& tol = {}) {
  BoundsReport rep;
  if (trajectory.empty()) return rep;
  rep.mass_available = basis.positive_combination.has_value();

  if (rep.mass_available) {
    const auto& e = *basis.positive_combination;
    long long emin = e[0], emax = e[0];
    for (long long v : e) {
      emin = std::min(emin, v);
      emax = std::max(emax, v);
    }
    rep.l1_constant = static_cast<double>(emax) / static_cast<double>(emin);

    const double m0 = trajectory.front().mass_e;
    const double l10 = trajectory.front().l1;
    for (const auto& r : trajectory) {
      const double drift = std::abs(r.mass_e - m0) / std::abs(m0);
      rep.mass_drift_rel_max = std::max(rep.mass_drift_rel_max, drift);
      const double ratio = r.l1 / (rep.l1_constant * l10);
      rep.l1_worst_ratio = std::max(rep.l1_worst_ratio, ratio);
    }
    rep.mass_ok = rep.mass_drift_rel_max <= tol.mass_rel;
    rep.l1_bound_ok = rep.l1_worst_ratio <= 1.0 + tol.mass_rel;
  }

  double q = 0.0;  // running trapezoidal integral of total dissipation
  rep.entropy_identity_residual.resize(trajectory.size());
  rep.entropy_identity_residual[0] = 0.0;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const auto& prev = trajectory[k - 1];
    const auto& cur = trajectory[k];
    const double dt = cur.t - prev.t;
    q += 0.5 * dt *
         (prev.diffusive_dissipation + prev.reactive_dissipation + cur.diffusive_dissipation +
          cur.reactive_dissipation);
    rep.entropy_identity_residual[k] = cur.entropy - trajectory.front().entropy + q;
    rep.entropy_identity_max =
        std::max(rep.entropy_identity_max, std::abs(rep.entropy_identity_residual[k]));
    rep.entropy_increase_max = std::max(rep.entropy_increase_max, cur.entropy - prev.entropy);
    rep.time_integrated_max_norm += 0.5 * dt * (prev.max_norm + cur.max_norm);
    rep.time_integrated_l2_sq += 0.5 * dt * (prev.l2_sq + cur.l2_sq);
  }
  rep.entropy_monotone_ok = rep.entropy_increase_max <= tol.entropy_step;
  rep.accumulations_finite =
      std::isfinite(rep.time_integrated_max_norm) && std::isfinite(rep.time_integrated_l2_sq);
  return rep;
}

}  // namespace catalyx
