// Command-line driver: validate a model, run the Lopatinskii-Shapiro sweep,
// or integrate the coupled bulk/boundary system and stream diagnostics.
//
// Exit codes
//   validate:  0 clean, 1 violations, 2 malformed config
//   check-ls:  0 pass, 1 located singular/indeterminate witness, 2 malformed config
//   simulate:  0 Completed, 1 rejected (validation/compatibility), 2 malformed
//              config, 3 Degeneration, 4 NonConvergence, 5 NormGrowth

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "catalyx/config.hpp"
#include "catalyx/diagnostics.hpp"
#include "catalyx/discretization.hpp"
#include "catalyx/io.hpp"
#include "catalyx/network.hpp"
#include "catalyx/symbol.hpp"
#include "catalyx/timestepper.hpp"

namespace {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("CATALYX_LOG");
    if (!env) return 1;
    if (std::strcmp(env, "error") == 0) return 0;
    if (std::strcmp(env, "warn") == 0) return 1;
    if (std::strcmp(env, "info") == 0) return 2;
    if (std::strcmp(env, "debug") == 0) return 3;
    return 1;
  }();
  return level;
}

void log_msg(int level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::fprintf(stderr, "[%s] %s\n", names[level], msg.c_str());
}

struct LoadedRun {
  catalyx::RunConfig cfg;
  catalyx::Grid grid = catalyx::Grid::interval(1.0, 3);
  catalyx::StateField c0;
};

LoadedRun load(const std::string& config_path) {
  LoadedRun run;
  run.cfg = catalyx::load_run_config(config_path);
  run.grid = run.cfg.grid.build();
  run.c0 = run.cfg.initial.build(run.grid, run.cfg.network.species_count());
  return run;
}

int cmd_validate(const std::string& config_path) {
  LoadedRun run = load(config_path);
  const auto& net = run.cfg.network;

  nlohmann::json report;
  const auto validation = catalyx::validate_network(net, run.cfg.monitors.detailed_balance_tol);
  report["validation"] = catalyx::validation_report_json(validation);

  bool basis_ok = true;
  try {
    const auto basis = catalyx::conserved_basis(net);
    report["conserved_basis"]["e"] = basis.e;
    if (basis.positive_combination)
      report["conserved_basis"]["positive_combination"] = *basis.positive_combination;
    else
      report["conserved_basis"]["positive_combination"] = nullptr;
  } catch (const std::invalid_argument& ex) {
    basis_ok = false;
    report["conserved_basis"] = {{"error", ex.what()}};
  }

  bool compat_clean = false;
  if (basis_ok) {
    const auto kappa = catalyx::equilibrium_constants(net);
    const auto compat = catalyx::check_compatibility(net, kappa, run.grid, run.c0,
                                                     run.cfg.solver.positivity_floor);
    compat_clean = compat.clean(run.cfg.monitors.compatibility_tol);
    report["compatibility"] =
        catalyx::compatibility_report_json(compat, run.cfg.monitors.compatibility_tol);
  } else {
    report["compatibility"] = {{"skipped", "conserved basis unavailable"}};
  }

  const bool clean = validation.clean() && basis_ok && compat_clean;
  report["clean"] = clean;
  std::cout << report.dump(2) << "\n";
  return clean ? 0 : 1;
}

int cmd_check_ls(const std::string& config_path) {
  LoadedRun run = load(config_path);
  const auto& net = run.cfg.network;

  const auto validation = catalyx::validate_network(net, run.cfg.monitors.detailed_balance_tol);
  if (!validation.clean()) {
    std::cout << catalyx::validation_report_json(validation).dump(2) << "\n";
    return 1;
  }

  nlohmann::json out;
  out["faces"] = nlohmann::json::array();
  bool pass = true;
  double min_scaled = std::numeric_limits<double>::infinity();
  int worst_face = -1;
  nlohmann::json worst_report;
  for (const auto& face : run.grid.boundary_faces()) {
    const Eigen::VectorXd trace = run.c0.c.col(face.cell);
    if (!(trace.minCoeff() > 0.0)) {
      log_msg(0, "boundary trace has a nonpositive component at face " +
                     std::to_string(face.id));
      return 1;
    }
    const auto rep = catalyx::ls_sweep(net, trace, run.cfg.ls.sector_phi, run.cfg.ls.plan);
    if (rep.min_scaled_singular_value < min_scaled) {
      min_scaled = rep.min_scaled_singular_value;
      worst_face = face.id;
      worst_report = catalyx::sweep_report_json(rep);
    }
    pass = pass && rep.pass;
  }
  out["pass"] = pass;
  out["min_scaled_singular_value"] = min_scaled;
  out["worst_face"] = worst_face;
  out["worst"] = worst_report;
  std::cout << out.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, int threads, const std::string& output_override,
                 int snapshot_every_override, bool warn_only_compat) {
  LoadedRun run = load(config_path);
  const auto& net = run.cfg.network;
  Eigen::setNbThreads(threads);

  const auto validation = catalyx::validate_network(net, run.cfg.monitors.detailed_balance_tol);
  if (!validation.clean()) {
    log_msg(0, "network validation failed; simulate requires a clean model");
    std::cout << catalyx::validation_report_json(validation).dump(2) << "\n";
    return 1;
  }
  const auto basis = catalyx::conserved_basis(net);
  const auto kappa = catalyx::equilibrium_constants(net);
  if (!basis.positive_combination)
    log_msg(1, "no strictly positive conserved vector exists; mass monitor unavailable");

  const auto compat = catalyx::check_compatibility(net, kappa, run.grid, run.c0,
                                                   run.cfg.solver.positivity_floor);
  if (!compat.clean(run.cfg.monitors.compatibility_tol)) {
    if (warn_only_compat) {
      log_msg(1, "initial data violate the compatibility conditions (continuing: warn-only)");
    } else {
      log_msg(0, "initial data violate the compatibility conditions");
      std::cout << catalyx::compatibility_report_json(compat, run.cfg.monitors.compatibility_tol)
                       .dump(2)
                << "\n";
      return 1;
    }
  }

  const std::string out_dir = output_override.empty() ? run.cfg.output.dir : output_override;
  const int snapshot_every =
      snapshot_every_override >= 0 ? snapshot_every_override : run.cfg.output.snapshot_every;
  std::filesystem::create_directories(out_dir);
  std::filesystem::create_directories(out_dir + "/snapshots");
  std::ofstream csv(out_dir + "/diagnostics.csv");
  csv << catalyx::csv_header() << "\n";

  catalyx::StepObserver observer;
  observer.on_record = [&](const catalyx::DiagnosticsRecord& rec) {
    csv << catalyx::csv_row(rec) << "\n";
  };
  observer.on_state = [&](int step, double t, const catalyx::StateField& s,
                          const catalyx::BoundaryState&) {
    if (snapshot_every <= 0 || step % snapshot_every != 0) return;
    char name[64];
    std::snprintf(name, sizeof(name), "/snapshots/step_%06d.json", step);
    std::ofstream snap(out_dir + name);
    snap << catalyx::snapshot_json(t, run.grid, net.species_names, s).dump() << "\n";
  };

  log_msg(2, "starting run: " + std::to_string(run.grid.cell_count()) + " cells, dt " +
                 std::to_string(run.cfg.solver.dt));
  const auto result =
      catalyx::advance(net, kappa, basis, run.grid, run.c0, run.cfg.solver, observer);
  csv.close();

  {
    std::ofstream snap(out_dir + "/snapshots/final.json");
    const double t_final =
        result.trajectory.empty() ? 0.0 : result.trajectory.back().t;
    snap << catalyx::snapshot_json(t_final, run.grid, net.species_names, result.state).dump()
         << "\n";
  }
  std::cout << catalyx::status_json(result.status, result.steps_completed).dump() << "\n";
  return catalyx::status_exit_code(result.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catalyx: solver and verification harness for bulk reaction-diffusion systems "
               "with equilibrated surface chemistry"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  std::string output_override;
  int snapshot_every = -1;
  bool warn_only_compat = false;

  auto* validate = app.add_subcommand("validate", "check model invariants and initial data");
  validate->add_option("--config", config_path, "run configuration (JSON)")->required();
  validate->add_option("--threads", threads, "worker threads (default 1)");

  auto* check_ls = app.add_subcommand("check-ls", "Lopatinskii-Shapiro sweep at the initial trace");
  check_ls->add_option("--config", config_path, "run configuration (JSON)")->required();
  check_ls->add_option("--threads", threads, "worker threads (default 1)");

  auto* simulate = app.add_subcommand("simulate", "integrate and stream diagnostics");
  simulate->add_option("--config", config_path, "run configuration (JSON)")->required();
  simulate->add_option("--threads", threads, "worker threads (default 1)");
  simulate->add_option("--output", output_override, "output directory (overrides config)");
  simulate->add_option("--snapshot-every", snapshot_every, "snapshot cadence in steps");
  simulate->add_flag("--warn-only-compatibility", warn_only_compat,
                     "do not reject incompatible initial data");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (check_ls->parsed()) return cmd_check_ls(config_path);
    return cmd_simulate(config_path, threads, output_override, snapshot_every, warn_only_compat);
  } catch (const catalyx::ConfigError& ex) {
    log_msg(0, ex.what());
    return 2;
  } catch (const std::exception& ex) {
    log_msg(0, ex.what());
    return 2;
  }
}
