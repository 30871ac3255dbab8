#pragma once

// Result emission: the frozen CSV diagnostics schema, JSON field snapshots,
// and the JSON report shapes used by the command-line driver.

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

#include "catalyx/diagnostics.hpp"
#include "catalyx/grid.hpp"
#include "catalyx/network.hpp"
#include "catalyx/symbol.hpp"
#include "catalyx/timestepper.hpp"

namespace catalyx {

inline const char* csv_header() {
  return "t,mass_e,entropy,diffusive_dissipation,reactive_dissipation,l2_sq,max_norm,"
         "min_concentration,boundary_flux_defect,boundary_equilibrium_defect,newton_iters";
}

/// Shortest round-trippable decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_row(const DiagnosticsRecord& r) {
  std::string row;
  row += format_double(r.t);
  for (double v : {r.mass_e, r.entropy, r.diffusive_dissipation, r.reactive_dissipation, r.l2_sq,
                   r.max_norm, r.min_concentration, r.boundary_flux_defect,
                   r.boundary_equilibrium_defect}) {
    row += ',';
    row += format_double(v);
  }
  row += ',';
  row += std::to_string(r.newton_iters);
  return row;
}

/// Field snapshot: grid metadata plus per-cell concentration vectors in
/// row-major cell order.
inline nlohmann::json snapshot_json(double t, const Grid& grid,
                                    const std::vector<std::string>& species,
                                    const StateField& state) {
  nlohmann::json j;
  j["t"] = t;
  j["grid"]["dim"] = grid.dim();
  std::vector<double> extent{grid.extent(0)};
  std::vector<int> cells{grid.cells(0)};
  if (grid.dim() == 2) {
    extent.push_back(grid.extent(1));
    cells.push_back(grid.cells(1));
  }
  j["grid"]["extent"] = extent;
  j["grid"]["cells"] = cells;
  j["species"] = species;
  nlohmann::json rows = nlohmann::json::array();
  for (int c = 0; c < state.c.cols(); ++c) {
    nlohmann::json cell = nlohmann::json::array();
    for (int i = 0; i < state.c.rows(); ++i) cell.push_back(state.c(i, c));
    rows.push_back(std::move(cell));
  }
  j["c"] = std::move(rows);
  return j;
}

inline nlohmann::json validation_report_json(const ValidationReport& rep) {
  nlohmann::json out;
  out["clean"] = rep.clean();
  out["violations"] = nlohmann::json::array();
  for (const auto& v : rep.violations) {
    const char* kind = "";
    switch (v.kind) {
      case Violation::Kind::structure: kind = "structure"; break;
      case Violation::Kind::nonpositive_diffusion: kind = "nonpositive_diffusion"; break;
      case Violation::Kind::nonpositive_rate_constant: kind = "nonpositive_rate_constant"; break;
      case Violation::Kind::detailed_balance: kind = "detailed_balance"; break;
      case Violation::Kind::surface_dependence: kind = "surface_dependence"; break;
      case Violation::Kind::too_many_surface_reactions: kind = "too_many_surface_reactions"; break;
    }
    out["violations"].push_back(
        {{"kind", kind}, {"index", v.index}, {"defect", v.defect}, {"detail", v.detail}});
  }
  return out;
}

inline nlohmann::json compatibility_report_json(const CompatibilityReport& rep, double tol) {
  nlohmann::json out;
  out["clean"] = rep.clean(tol);
  out["tolerance"] = tol;
  out["min_concentration"] = rep.min_concentration;
  out["max_surface_residual"] = rep.max_surface_residual;
  out["max_flux_defect"] = rep.max_flux_defect;
  out["positivity_ok"] = rep.positivity_ok;
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : rep.faces) {
    if (f.surface_residual_max <= tol && f.flux_defect_max <= tol) continue;
    faces.push_back({{"face", f.face},
                     {"surface_residual", f.surface_residual_max},
                     {"flux_defect", f.flux_defect_max},
                     {"min_concentration", f.min_concentration}});
  }
  out["flagged_faces"] = std::move(faces);
  return out;
}

inline nlohmann::json sweep_report_json(const SweepReport& rep) {
  nlohmann::json out;
  out["pass"] = rep.pass;
  out["min_scaled_singular_value"] = rep.min_scaled_singular_value;
  out["margin"] = rep.margin;
  out["samples"] = {{"total", rep.samples_total},
                    {"singular", rep.samples_singular},
                    {"indeterminate", rep.samples_indeterminate}};
  out["witness"] = {{"lambda_re", rep.worst.lambda.real()},
                    {"lambda_im", rep.worst.lambda.imag()},
                    {"xi_norm_sq", rep.worst.xi_norm_sq},
                    {"sample_index", rep.worst.sample_index},
                    {"verdict", to_string(rep.worst.verdict)}};
  return out;
}

inline int status_exit_code(const RunStatus& s) {
  if (std::holds_alternative<Completed>(s)) return 0;
  if (std::holds_alternative<Degeneration>(s)) return 3;
  if (std::holds_alternative<NonConvergence>(s)) return 4;
  return 5;
}

inline nlohmann::json status_json(const RunStatus& s, int steps_completed) {
  nlohmann::json out;
  out["status"] = status_name(s);
  out["steps_completed"] = steps_completed;
  out["exit_code"] = status_exit_code(s);
  if (const auto* d = std::get_if<Degeneration>(&s)) {
    out["species"] = d->species;
    out["time"] = d->time;
    out["cell"] = d->cell;
  } else if (const auto* n = std::get_if<NonConvergence>(&s)) {
    out["time"] = n->time;
    out["residual"] = n->residual;
    out["step"] = n->step;
  } else if (const auto* g = std::get_if<NormGrowth>(&s)) {
    out["time"] = g->time;
    out["norm"] = g->norm;
  }
  return out;
}

}  // namespace catalyx
