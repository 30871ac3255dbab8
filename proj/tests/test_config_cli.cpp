#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catalyx/config.hpp"
#include "catalyx/expression.hpp"
#include "catalyx/io.hpp"
#include "catalyx/timestepper.hpp"

using namespace catalyx;
using Catch::Matchers::WithinAbs;

namespace {

std::string bin_path() {
  const char* p = std::getenv("CATALYX_BIN");
  REQUIRE(p != nullptr);
  return p;
}

std::filesystem::path src_dir() {
  const char* p = std::getenv("CATALYX_SRC_DIR");
  REQUIRE(p != nullptr);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = bin_path() + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::filesystem::path write_temp(const std::string& name, const nlohmann::json& j) {
  const auto dir = std::filesystem::temp_directory_path() / "catalyx_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("expression grammar") {
  REQUIRE_THAT(Expression::parse("1 + 2*3").eval(0), WithinAbs(7.0, 1e-15));
  REQUIRE_THAT(Expression::parse("2^3^1").eval(0), WithinAbs(8.0, 1e-15));
  REQUIRE_THAT(Expression::parse("pow(2, 10)").eval(0), WithinAbs(1024.0, 1e-12));
  REQUIRE_THAT(Expression::parse("-x + 3").eval(2.0), WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(Expression::parse("sin(pi/2) + cos(0)").eval(0), WithinAbs(2.0, 1e-15));
  REQUIRE_THAT(Expression::parse("exp(1)").eval(0), WithinAbs(std::exp(1.0), 1e-15));
  REQUIRE_THAT(Expression::parse("x*y - y/2").eval(3.0, 4.0), WithinAbs(10.0, 1e-15));
  REQUIRE_THAT(Expression::parse("(1 + 0.2*cos(pi*x))").eval(0.5), WithinAbs(1.0, 1e-12));

  REQUIRE_THROWS_AS(Expression::parse("foo(1)"), std::invalid_argument);
  REQUIRE_THROWS_AS(Expression::parse("1 +"), std::invalid_argument);
  REQUIRE_THROWS_AS(Expression::parse("(1"), std::invalid_argument);
  REQUIRE_THROWS_AS(Expression::parse("1 2"), std::invalid_argument);
  REQUIRE_THROWS_AS(Expression::parse("pow(1)"), std::invalid_argument);
}

TEST_CASE("csv header is frozen") {
  REQUIRE(std::string(csv_header()) ==
          "t,mass_e,entropy,diffusive_dissipation,reactive_dissipation,l2_sq,max_norm,"
          "min_concentration,boundary_flux_defect,boundary_equilibrium_defect,newton_iters");
}

TEST_CASE("snapshot schema is frozen") {
  auto grid = Grid::interval(1.0, 4);
  StateField s = StateField::constant(grid, Eigen::Vector2d(1.0, 2.0));
  const auto j = snapshot_json(0.5, grid, {"A", "B"}, s);
  REQUIRE(j.contains("t"));
  REQUIRE(j.contains("grid"));
  REQUIRE(j.at("grid").contains("dim"));
  REQUIRE(j.at("grid").contains("extent"));
  REQUIRE(j.at("grid").contains("cells"));
  REQUIRE(j.contains("species"));
  REQUIRE(j.contains("c"));
  REQUIRE(j.at("c").size() == 4);
  REQUIRE(j.at("c").at(0).size() == 2);
  REQUIRE(j.at("c").at(0).at(0).get<double>() == 1.0);
}

TEST_CASE("config round trip reproduces a bit-identical run") {
  const auto cfg1 = load_run_config((src_dir() / "configs/three_species_1d.json").string());
  const auto cfg2 = run_config_from_json(run_config_to_json(cfg1));

  auto run_rows = [](const RunConfig& cfg) {
    auto grid = cfg.grid.build();
    auto c0 = cfg.initial.build(grid, cfg.network.species_count());
    auto kappa = equilibrium_constants(cfg.network);
    auto basis = conserved_basis(cfg.network);
    SolverConfig solver = cfg.solver;
    solver.t_end = 20 * solver.dt;
    const auto run = advance(cfg.network, kappa, basis, grid, c0, solver);
    std::string rows;
    for (const auto& rec : run.trajectory) rows += csv_row(rec) + "\n";
    return rows;
  };
  REQUIRE(run_rows(cfg1) == run_rows(cfg2));
}

TEST_CASE("cli validate accepts the reference configuration") {
  REQUIRE(run_cli("validate --config " +
                  (src_dir() / "configs/three_species_1d.json").string()) == 0);
}

TEST_CASE("cli validate rejects dependent surface stoichiometry") {
  auto j = nlohmann::json::parse(read_file(src_dir() / "configs/three_species_1d.json"));
  j["network"]["surface_reactions"].push_back({{"nu", {-2, -2, 2}}});
  const auto path = write_temp("dependent.json", j);
  REQUIRE(run_cli("validate --config " + path.string()) == 1);
}

TEST_CASE("cli exits 2 on a missing or malformed config") {
  REQUIRE(run_cli("validate --config /nonexistent/nope.json") == 2);
  const auto dir = std::filesystem::temp_directory_path() / "catalyx_tests";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{ not json";
  REQUIRE(run_cli("validate --config " + (dir / "broken.json").string()) == 2);
  REQUIRE(run_cli("simulate --config " + (dir / "broken.json").string()) == 2);
}

TEST_CASE("cli check-ls passes on the reference configuration") {
  auto j = nlohmann::json::parse(read_file(src_dir() / "configs/three_species_1d.json"));
  // Thin the sweep so the test stays fast; coverage is the sweep test's job.
  j["ls"]["lambda_mag_count"] = 4;
  j["ls"]["angle_count"] = 3;
  j["ls"]["xi_sq_count"] = 3;
  const auto path = write_temp("checkls.json", j);
  REQUIRE(run_cli("check-ls --config " + path.string()) == 0);
}

TEST_CASE("cli simulate completes on an equilibrium run and writes the outputs") {
  const auto out_dir = std::filesystem::temp_directory_path() / "catalyx_tests" / "eq_run";
  std::filesystem::remove_all(out_dir);
  nlohmann::json j;
  j["network"] = {{"species", {"A1", "A2", "A3"}},
                  {"d", {1.0, 0.8, 1.2}},
                  {"mu0", {0.0, 0.0, 0.0}},
                  {"surface_reactions", {{{"nu", {-1, -1, 1}}}}}};
  j["grid"] = {{"dim", 1}, {"extent", {1.0}}, {"cells", {16}}};
  j["initial"] = {{"constant", {1.0, 1.0, 1.0}}};
  j["solver"] = {{"dt", 1e-3}, {"t_end", 2e-2}};
  j["output"] = {{"dir", out_dir.string()}, {"snapshot_every", 10}};
  const auto path = write_temp("equilibrium.json", j);

  REQUIRE(run_cli("simulate --config " + path.string()) == 0);
  REQUIRE(std::filesystem::exists(out_dir / "diagnostics.csv"));
  REQUIRE(std::filesystem::exists(out_dir / "snapshots/final.json"));
  REQUIRE(std::filesystem::exists(out_dir / "snapshots/step_000010.json"));

  const std::string csv = read_file(out_dir / "diagnostics.csv");
  REQUIRE(csv.rfind(csv_header(), 0) == 0);
  // 1 header + 21 records (t = 0 and 20 steps).
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 22);

  // Determinism: a second identical run produces identical bytes.
  const auto out2 = std::filesystem::temp_directory_path() / "catalyx_tests" / "eq_run2";
  std::filesystem::remove_all(out2);
  REQUIRE(run_cli("simulate --config " + path.string() + " --output " + out2.string()) == 0);
  REQUIRE(read_file(out2 / "diagnostics.csv") == csv);
}

TEST_CASE("cli simulate maps degeneration to exit 3") {
  nlohmann::json j;
  j["network"] = {{"species", {"A1", "A2", "A3"}},
                  {"d", {1.0, 1.0, 1.0}},
                  {"mu0", {0.0, 0.0, 0.0}},
                  {"surface_reactions", {{{"nu", {-1, -1, 1}}}}}};
  j["grid"] = {{"dim", 1}, {"extent", {1.0}}, {"cells", {8}}};
  // Species A1 is zero everywhere but carries a negative surface power.
  j["initial"] = {{"constant", {0.0, 1.0, 1.0}}};
  j["solver"] = {{"dt", 1e-3}, {"t_end", 1e-2}};
  j["output"] = {{"dir", (std::filesystem::temp_directory_path() / "catalyx_tests/deg").string()}};
  const auto path = write_temp("degenerate.json", j);
  REQUIRE(run_cli("simulate --config " + path.string() + " --warn-only-compatibility") == 3);
}

TEST_CASE("cli simulate maps newton failure to exit 4") {
  nlohmann::json j;
  j["network"] = {{"species", {"A"}},
                  {"d", {1.0}},
                  {"mu0", {0.0}},
                  {"bulk_reactions",
                   {{{"alpha", {6}}, {"beta", {0}}, {"kf", 1.0}, {"kb", 1.0}}}}};
  j["grid"] = {{"dim", 1}, {"extent", {1.0}}, {"cells", {4}}};
  j["initial"] = {{"constant", {1000.0}}};
  j["solver"] = {{"dt", 1e6}, {"t_end", 1e6}};
  j["output"] = {{"dir", (std::filesystem::temp_directory_path() / "catalyx_tests/stiff").string()}};
  const auto path = write_temp("stiff.json", j);
  REQUIRE(run_cli("simulate --config " + path.string() + " --warn-only-compatibility") == 4);
}
