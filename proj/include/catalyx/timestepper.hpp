#pragma once

// Implicit Euler integration of the coupled interior/boundary DAE with a
// damped Newton solve per step, plus the run-status monitors implementing the
// continuation trichotomy: global completion, degeneration of a species
// minimum, residual non-convergence, and norm growth (the computable proxy
// for phase-space blow-up).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <variant>
#include <vector>

#include "catalyx/diagnostics.hpp"
#include "catalyx/discretization.hpp"
#include "catalyx/grid.hpp"
#include "catalyx/network.hpp"

namespace catalyx {

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double newton_tol = 1e-10;       // max-norm residual tolerance
  int newton_max_iter = 30;
  double damping_factor = 0.5;     // backtracking factor
  double damping_min = 9.5367431640625e-7;  // 2^-20
  double positivity_floor = kDefaultPositivityFloor;
  double norm_growth_factor = 1e6;  // cap relative to the initial max-norm
};

struct Completed {};
struct Degeneration {
  int species = -1;
  double time = 0.0;
  int cell = -1;
};
struct NonConvergence {
  double time = 0.0;
  double residual = 0.0;
  int step = -1;
};
struct NormGrowth {
  double time = 0.0;
  double norm = 0.0;
};

using RunStatus = std::variant<Completed, Degeneration, NonConvergence, NormGrowth>;

inline const char* status_name(const RunStatus& s) {
  if (std::holds_alternative<Completed>(s)) return "Completed";
  if (std::holds_alternative<Degeneration>(s)) return "Degeneration";
  if (std::holds_alternative<NonConvergence>(s)) return "NonConvergence";
  return "NormGrowth";
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  Eigen::VectorXd x;
};

/// Damped Newton iteration with backtracking on the residual max-norm and a
/// direct sparse solve of J delta = -res. Iterates that would push a
/// constrained component to or below the floor are rejected by the line
/// search; if no admissible step length remains the solve reports failure.
template <class ResidualFn, class JacobianFn>
NewtonOutcome newton_solve(ResidualFn&& residual, JacobianFn&& jacobian,
                           const Eigen::VectorXd& guess, const SolverConfig& cfg,
                           const std::vector<int>& floored = {}) {
  NewtonOutcome out;
  out.x = guess;
  Eigen::VectorXd res = residual(out.x);
  out.residual_norm = res.lpNorm<Eigen::Infinity>();
  if (out.residual_norm < cfg.newton_tol) {
    out.converged = true;
    return out;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
    Eigen::SparseMatrix<double> jac = jacobian(out.x);
    jac.makeCompressed();
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      out.converged = false;
      return out;
    }
    const Eigen::VectorXd delta = lu.solve(-res);
    double s = 1.0;
    bool accepted = false;
    while (s >= cfg.damping_min) {
      const Eigen::VectorXd cand = out.x + s * delta;
      bool admissible = true;
      for (int idx : floored)
        if (cand[idx] <= cfg.positivity_floor) admissible = false;
      if (admissible) {
        const Eigen::VectorXd res_c = residual(cand);
        const double norm_c = res_c.lpNorm<Eigen::Infinity>();
        if (std::isfinite(norm_c) && norm_c <= (1.0 - 1e-4 * s) * out.residual_norm) {
          out.x = cand;
          res = res_c;
          out.residual_norm = norm_c;
          accepted = true;
          break;
        }
      }
      s *= cfg.damping_factor;
    }
    out.iterations = iter + 1;
    if (!accepted) {
      out.converged = false;
      return out;
    }
    if (out.residual_norm < cfg.newton_tol) {
      out.converged = true;
      return out;
    }
  }
  out.converged = false;
  return out;
}

struct RunResult {
  std::vector<DiagnosticsRecord> trajectory;
  StateField state;
  BoundaryState boundary;
  RunStatus status = Completed{};
  int steps_completed = 0;
};

/// Hooks invoked as the run progresses; both may be empty. on_record fires
/// for every appended diagnostics row (including t = 0), on_state after every
/// accepted step (including the initial state as step 0).
struct StepObserver {
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(int step, double t, const StateField&, const BoundaryState&)> on_state;
};

/// Face-trace unknown indices of species that appear with a negative power in
/// some surface constraint; these must stay above the positivity floor.
inline std::vector<int> constrained_unknowns(const ReactionNetwork& net, const Grid& grid) {
  const SystemLayout lay(net, grid);
  std::vector<bool> species_constrained(net.species_count(), false);
  for (const auto& r : net.surface_reactions)
    for (int i = 0; i < net.species_count(); ++i)
      if (r.nu[i] < 0) species_constrained[i] = true;
  std::vector<int> idx;
  for (int f = 0; f < grid.face_count(); ++f)
    for (int i = 0; i < net.species_count(); ++i)
      if (species_constrained[i]) idx.push_back(lay.face_index(f, i));
  return idx;
}

/// Runs implicit Euler steps until t_end, recording diagnostics after every
/// accepted step. The step count is round(t_end / dt).
inline RunResult advance(const ReactionNetwork& net, const EquilibriumConstants& kappa,
                         const ConservedBasis& basis, const Grid& grid, const StateField& c0,
                         const SolverConfig& cfg, const StepObserver& observer = {}) {
  const SystemLayout lay(net, grid);
  RunResult run;
  run.state = c0;
  run.boundary = BoundaryState::from_cells(grid, c0);

  DiagnosticsRecord rec0 = evaluate(net, basis, grid, run.state, run.boundary,
                                    cfg.positivity_floor);
  rec0.t = 0.0;
  run.trajectory.push_back(rec0);
  if (observer.on_record) observer.on_record(rec0);
  if (observer.on_state) observer.on_state(0, 0.0, run.state, run.boundary);
  const double initial_max_norm = rec0.max_norm;

  const std::vector<int> floored = constrained_unknowns(net, grid);
  const long n_steps = std::max<long>(1, std::lround(cfg.t_end / cfg.dt));

  for (long step = 1; step <= n_steps; ++step) {
    const double t_next = step * cfg.dt;
    const StateField c_old = run.state;
    auto residual = [&](const Eigen::VectorXd& x) {
      StateField s;
      BoundaryState b;
      unpack(lay, x, s, b);
      return assemble_step_residual(net, kappa, basis, grid, c_old, s, b, cfg.dt,
                                    cfg.positivity_floor);
    };
    auto jacobian = [&](const Eigen::VectorXd& x) {
      StateField s;
      BoundaryState b;
      unpack(lay, x, s, b);
      return step_jacobian(net, kappa, basis, grid, s, b, cfg.dt, cfg.positivity_floor);
    };

    NewtonOutcome outcome;
    try {
      outcome = newton_solve(residual, jacobian, pack(lay, run.state, run.boundary), cfg,
                             floored);
    } catch (const DegenerateConcentration& ex) {
      run.status = Degeneration{ex.species(), t_next, ex.location()};
      return run;
    }
    if (!outcome.converged) {
      run.status = NonConvergence{t_next, outcome.residual_norm, static_cast<int>(step)};
      return run;
    }
    unpack(lay, outcome.x, run.state, run.boundary);
    run.steps_completed = static_cast<int>(step);

    // Degeneration monitor: first cell minimum below the floor stops the run.
    int min_i = 0, min_j = 0;
    const double min_c = run.state.c.minCoeff(&min_i, &min_j);
    if (min_c < cfg.positivity_floor) {
      run.status = Degeneration{min_i, t_next, min_j};
      return run;
    }
    const double max_norm = run.state.c.cwiseAbs().maxCoeff();
    if (initial_max_norm > 0.0 && max_norm > cfg.norm_growth_factor * initial_max_norm) {
      run.status = NormGrowth{t_next, max_norm};
      return run;
    }

    DiagnosticsRecord rec = evaluate(net, basis, grid, run.state, run.boundary,
                                     cfg.positivity_floor);
    rec.t = t_next;
    rec.newton_iters = outcome.iterations;
    run.trajectory.push_back(rec);
    if (observer.on_record) observer.on_record(rec);
    if (observer.on_state)
      observer.on_state(static_cast<int>(step), t_next, run.state, run.boundary);
  }
  run.status = Completed{};
  return run;
}

}  // namespace catalyx
