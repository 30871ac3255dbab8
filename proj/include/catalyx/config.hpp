#pragma once

// Run configuration: JSON ingestion and re-emission. JSON for configs and
// snapshots, CSV for time series; schemas are frozen by golden-file tests.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "catalyx/expression.hpp"
#include "catalyx/grid.hpp"
#include "catalyx/network.hpp"
#include "catalyx/symbol.hpp"
#include "catalyx/timestepper.hpp"

namespace catalyx {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct GridSpec {
  int dim = 1;
  std::vector<double> extent{1.0};
  std::vector<int> cells{64};

  Grid build() const {
    if (dim == 1) return Grid::interval(extent.at(0), cells.at(0));
    return Grid::rectangle(extent.at(0), extent.at(1), cells.at(0), cells.at(1));
  }
};

struct InitialSpec {
  std::vector<double> constant;          // one value per species, or
  std::vector<std::string> expressions;  // one expression per species

  StateField build(const Grid& grid, int n_species) const {
    StateField s;
    s.c.resize(n_species, grid.cell_count());
    if (!constant.empty()) {
      if (static_cast<int>(constant.size()) != n_species)
        throw ConfigError("initial.constant length differs from species count");
      for (int j = 0; j < grid.cell_count(); ++j)
        for (int i = 0; i < n_species; ++i) s.c(i, j) = constant[i];
      return s;
    }
    if (static_cast<int>(expressions.size()) != n_species)
      throw ConfigError("initial.expressions length differs from species count");
    std::vector<Expression> ex;
    ex.reserve(expressions.size());
    for (const auto& t : expressions) {
      try {
        ex.push_back(Expression::parse(t));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    for (int j = 0; j < grid.cell_count(); ++j) {
      const auto xy = grid.cell_center(j);
      for (int i = 0; i < n_species; ++i) s.c(i, j) = ex[i].eval(xy[0], xy[1]);
    }
    return s;
  }
};

struct MonitorSpec {
  double detailed_balance_tol = 1e-12;
  double compatibility_tol = 1e-2;
  double mass_tol = 1e-8;
  double entropy_step_tol = 1e-10;
};

struct LsSpec {
  double sector_phi = std::numbers::pi / 4;
  SweepPlan plan;
};

struct OutputSpec {
  std::string dir = "out";
  int snapshot_every = 0;  // 0: final snapshot only
};

struct RunConfig {
  ReactionNetwork network;
  GridSpec grid;
  InitialSpec initial;
  SolverConfig solver;
  MonitorSpec monitors;
  LsSpec ls;
  OutputSpec output;
  unsigned long long seed = 0;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

}  // namespace detail

inline ReactionNetwork network_from_json(const nlohmann::json& j) {
  using detail::require;
  ReactionNetwork net;
  require(j.contains("species") && j.at("species").is_array(), "network.species missing");
  net.species_names = j.at("species").get<std::vector<std::string>>();
  const int n = static_cast<int>(net.species_names.size());
  require(n > 0, "network.species must be non-empty");

  const auto d = detail::get_or<std::vector<double>>(j, "d", std::vector<double>(n, 1.0));
  const auto mu0 = detail::get_or<std::vector<double>>(j, "mu0", std::vector<double>(n, 0.0));
  require(static_cast<int>(d.size()) == n, "network.d length mismatch");
  require(static_cast<int>(mu0.size()) == n, "network.mu0 length mismatch");
  net.d = Eigen::Map<const Eigen::VectorXd>(d.data(), n);
  net.mu0 = Eigen::Map<const Eigen::VectorXd>(mu0.data(), n);

  for (const auto& rj : detail::get_or<nlohmann::json>(j, "bulk_reactions", nlohmann::json::array())) {
    BulkReaction r;
    r.alpha = rj.at("alpha").get<std::vector<long long>>();
    r.beta = rj.at("beta").get<std::vector<long long>>();
    r.kf = rj.at("kf").get<double>();
    r.kb = rj.at("kb").get<double>();
    require(static_cast<int>(r.alpha.size()) == n && static_cast<int>(r.beta.size()) == n,
            "bulk reaction exponent length mismatch");
    for (long long v : r.alpha) require(v >= 0, "bulk reaction alpha must be nonnegative");
    for (long long v : r.beta) require(v >= 0, "bulk reaction beta must be nonnegative");
    net.bulk_reactions.push_back(std::move(r));
  }
  for (const auto& rj :
       detail::get_or<nlohmann::json>(j, "surface_reactions", nlohmann::json::array())) {
    SurfaceReaction r;
    r.nu = rj.at("nu").get<std::vector<long long>>();
    require(static_cast<int>(r.nu.size()) == n, "surface reaction stoichiometry length mismatch");
    net.surface_reactions.push_back(std::move(r));
  }
  return net;
}

inline nlohmann::json network_to_json(const ReactionNetwork& net) {
  nlohmann::json j;
  j["species"] = net.species_names;
  j["d"] = std::vector<double>(net.d.data(), net.d.data() + net.d.size());
  j["mu0"] = std::vector<double>(net.mu0.data(), net.mu0.data() + net.mu0.size());
  j["bulk_reactions"] = nlohmann::json::array();
  for (const auto& r : net.bulk_reactions)
    j["bulk_reactions"].push_back(
        {{"alpha", r.alpha}, {"beta", r.beta}, {"kf", r.kf}, {"kb", r.kb}});
  j["surface_reactions"] = nlohmann::json::array();
  for (const auto& r : net.surface_reactions) j["surface_reactions"].push_back({{"nu", r.nu}});
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {}) {
  using detail::get_or;
  using detail::require;
  RunConfig cfg;

  if (j.contains("network_file")) {
    const std::filesystem::path p = base_dir / j.at("network_file").get<std::string>();
    std::ifstream in(p);
    require(in.good(), "cannot open network file " + p.string());
    nlohmann::json nj;
    try {
      in >> nj;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("network file parse error: " + std::string(e.what()));
    }
    cfg.network = network_from_json(nj);
  } else {
    require(j.contains("network"), "config needs 'network' or 'network_file'");
    cfg.network = network_from_json(j.at("network"));
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.dim = get_or<int>(g, "dim", 1);
    require(cfg.grid.dim == 1 || cfg.grid.dim == 2, "grid.dim must be 1 or 2");
    cfg.grid.extent = g.at("extent").get<std::vector<double>>();
    cfg.grid.cells = g.at("cells").get<std::vector<int>>();
    require(static_cast<int>(cfg.grid.extent.size()) == cfg.grid.dim, "grid.extent length");
    require(static_cast<int>(cfg.grid.cells.size()) == cfg.grid.dim, "grid.cells length");
  }

  require(j.contains("initial"), "config needs 'initial'");
  const auto& init = j.at("initial");
  if (init.contains("constant"))
    cfg.initial.constant = init.at("constant").get<std::vector<double>>();
  else if (init.contains("expressions"))
    cfg.initial.expressions = init.at("expressions").get<std::vector<std::string>>();
  else
    throw ConfigError("initial needs 'constant' or 'expressions'");

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.dt = get_or<double>(s, "dt", cfg.solver.dt);
    cfg.solver.t_end = get_or<double>(s, "t_end", cfg.solver.t_end);
    cfg.solver.newton_tol = get_or<double>(s, "newton_tol", cfg.solver.newton_tol);
    cfg.solver.newton_max_iter = get_or<int>(s, "newton_max_iter", cfg.solver.newton_max_iter);
    cfg.solver.positivity_floor = get_or<double>(s, "positivity_floor", cfg.solver.positivity_floor);
    cfg.solver.norm_growth_factor =
        get_or<double>(s, "norm_growth_factor", cfg.solver.norm_growth_factor);
    require(cfg.solver.dt > 0 && cfg.solver.t_end > 0, "solver.dt and t_end must be positive");
    require(cfg.solver.dt <= cfg.solver.t_end, "solver.dt must not exceed t_end");
    require(cfg.solver.newton_tol > 0 && cfg.solver.positivity_floor > 0,
            "solver tolerances must be positive");
  }

  if (j.contains("monitors")) {
    const auto& m = j.at("monitors");
    cfg.monitors.detailed_balance_tol =
        get_or<double>(m, "detailed_balance_tol", cfg.monitors.detailed_balance_tol);
    cfg.monitors.compatibility_tol =
        get_or<double>(m, "compatibility_tol", cfg.monitors.compatibility_tol);
    cfg.monitors.mass_tol = get_or<double>(m, "mass_tol", cfg.monitors.mass_tol);
    cfg.monitors.entropy_step_tol =
        get_or<double>(m, "entropy_step_tol", cfg.monitors.entropy_step_tol);
    require(cfg.monitors.detailed_balance_tol > 0 && cfg.monitors.compatibility_tol > 0 &&
                cfg.monitors.mass_tol > 0 && cfg.monitors.entropy_step_tol > 0,
            "monitor tolerances must be positive");
  }

  if (j.contains("ls")) {
    const auto& l = j.at("ls");
    cfg.ls.sector_phi = get_or<double>(l, "sector_phi", cfg.ls.sector_phi);
    require(cfg.ls.sector_phi > 0 && cfg.ls.sector_phi < std::numbers::pi / 2,
            "ls.sector_phi must lie in (0, pi/2)");
    auto& p = cfg.ls.plan;
    p.lambda_mag_min = get_or<double>(l, "lambda_mag_min", p.lambda_mag_min);
    p.lambda_mag_max = get_or<double>(l, "lambda_mag_max", p.lambda_mag_max);
    p.lambda_mag_count = get_or<int>(l, "lambda_mag_count", p.lambda_mag_count);
    p.angle_count = get_or<int>(l, "angle_count", p.angle_count);
    p.xi_sq_min = get_or<double>(l, "xi_sq_min", p.xi_sq_min);
    p.xi_sq_max = get_or<double>(l, "xi_sq_max", p.xi_sq_max);
    p.xi_sq_count = get_or<int>(l, "xi_sq_count", p.xi_sq_count);
    p.include_zero_xi = get_or<bool>(l, "include_zero_xi", p.include_zero_xi);
    p.mu_shift = get_or<double>(l, "mu_shift", p.mu_shift);
    p.margin = get_or<double>(l, "margin", p.margin);
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    cfg.output.dir = get_or<std::string>(o, "dir", cfg.output.dir);
    cfg.output.snapshot_every = get_or<int>(o, "snapshot_every", cfg.output.snapshot_every);
  }
  cfg.seed = get_or<unsigned long long>(j, "seed", 0ull);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return run_config_from_json(j, std::filesystem::path(path).parent_path());
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["network"] = network_to_json(cfg.network);
  j["grid"] = {{"dim", cfg.grid.dim}, {"extent", cfg.grid.extent}, {"cells", cfg.grid.cells}};
  if (!cfg.initial.constant.empty())
    j["initial"] = {{"constant", cfg.initial.constant}};
  else
    j["initial"] = {{"expressions", cfg.initial.expressions}};
  j["solver"] = {{"dt", cfg.solver.dt},
                 {"t_end", cfg.solver.t_end},
                 {"newton_tol", cfg.solver.newton_tol},
                 {"newton_max_iter", cfg.solver.newton_max_iter},
                 {"positivity_floor", cfg.solver.positivity_floor},
                 {"norm_growth_factor", cfg.solver.norm_growth_factor}};
  j["monitors"] = {{"detailed_balance_tol", cfg.monitors.detailed_balance_tol},
                   {"compatibility_tol", cfg.monitors.compatibility_tol},
                   {"mass_tol", cfg.monitors.mass_tol},
                   {"entropy_step_tol", cfg.monitors.entropy_step_tol}};
  j["ls"] = {{"sector_phi", cfg.ls.sector_phi},
             {"lambda_mag_min", cfg.ls.plan.lambda_mag_min},
             {"lambda_mag_max", cfg.ls.plan.lambda_mag_max},
             {"lambda_mag_count", cfg.ls.plan.lambda_mag_count},
             {"angle_count", cfg.ls.plan.angle_count},
             {"xi_sq_min", cfg.ls.plan.xi_sq_min},
             {"xi_sq_max", cfg.ls.plan.xi_sq_max},
             {"xi_sq_count", cfg.ls.plan.xi_sq_count},
             {"include_zero_xi", cfg.ls.plan.include_zero_xi},
             {"mu_shift", cfg.ls.plan.mu_shift},
             {"margin", cfg.ls.plan.margin}};
  j["output"] = {{"dir", cfg.output.dir}, {"snapshot_every", cfg.output.snapshot_every}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace catalyx
