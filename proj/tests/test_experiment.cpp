#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rosyn/experiment.hpp"
#include "rosyn/lifted_system.hpp"
#include "rosyn/regret.hpp"
#include "rosyn/serialize.hpp"

namespace fs = std::filesystem;

namespace {

std::string demo_config(const std::string& out_dir, const std::string& extra,
                        const std::string& strategies =
                            "[\"shor_plus_eval\", \"hinf\"]") {
  return std::string("{") + R"(
    "seed": 7,
    "alpha": 0.1,
    "horizons": [2],
    "strategies": )" + strategies + R"(,
    "plant": {"demo_spring_damper": {}},
    "search": {"grid_points": 6, "bisect_steps": 4, "trial_irm_iters": 6},
    "output_dir": ")" + out_dir + "\"" + extra + "}";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config validation catches the usual mistakes") {
  using rosyn::ExperimentConfig;
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"seed":1,"horizons":[],"strategies":["hinf"],
                          "plant":{"demo_spring_damper":{}}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"seed":1,"horizons":[2],"strategies":["wat"],
                          "plant":{"demo_spring_damper":{}}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"seed":1,"alpha":-2,"horizons":[2],
                          "strategies":["hinf"],
                          "plant":{"demo_spring_damper":{}}})"),
                  std::invalid_argument);

  const auto ok = ExperimentConfig::from_json_text(
      R"({"seed":3,"horizons":[2,5],"strategies":["hinf"],
          "plant":{"demo_spring_damper":{"m1":2.0}}})");
  CHECK(ok.seed == 3);
  CHECK(ok.plant.demo_params.m1 == 2.0);
  CHECK(ok.horizons.size() == 2);
}

TEST_CASE("explicit plants parse and validate") {
  const std::string text = R"({
    "seed": 1, "horizons": [1], "strategies": ["hinf"],
    "plant": {"explicit": {
      "horizon": 1,
      "A":  [[[0.5]]], "Bu": [[[1.0]]], "Ba": [[[1.0]]],
      "Cy": [[[1.0]], [[1.0]]], "Cz": [[[1.0]], [[1.0]]],
      "Dya": [[[0.0]], [[0.0]]], "Dzu": [[[0.0]], [[0.0]]]
    }}})";
  const auto config = rosyn::ExperimentConfig::from_json_text(text);
  const auto plant = config.plant.build(1);
  CHECK(plant.nx == 1);
  CHECK(plant.A[0](0, 0) == 0.5);
  CHECK_THROWS_AS(config.plant.build(2), std::invalid_argument);
}

TEST_CASE("synthesize writes consistent artifacts") {
  TempDir dir("rosyn_test_synth");
  const auto config = rosyn::ExperimentConfig::from_json_text(
      demo_config(dir.path.string(), "", "[\"hinf\"]"));
  REQUIRE(rosyn::cmd_synthesize(config) == rosyn::RunStatus::Ok);

  const std::string summary = slurp(dir.path / "summary.csv");
  CHECK(summary.find("strategy,T,alpha,lambda,mu,shor_bound,wallclock_s") == 0);
  CHECK(summary.find("hinf,2,0.1") != std::string::npos);

  // The emitted certificate is recomputable from the emitted controller.
  const auto cdoc = nlohmann::json::parse(slurp(dir.path / "controller.json"));
  const auto omega = rosyn::response_from_json(cdoc.at("omega").dump());
  const auto plant = config.plant.build(cdoc.at("horizon").get<int>());
  const auto cert = rosyn::regret_metric(omega, rosyn::lift(plant),
                                         rosyn::StealthSpec(config.alpha));
  REQUIRE(cert.status == rosyn::RegretStatus::Optimal);
  const auto cfile =
      nlohmann::json::parse(slurp(dir.path / "certificate.json"));
  CHECK(std::abs(cert.mu_star - cfile.at("mu_star").get<double>()) <=
        1e-6 * std::max(1.0, cert.mu_star));

  // The full synthesis document round-trips the response blocks.
  const auto sdoc =
      nlohmann::json::parse(slurp(dir.path / "synthesis_hinf_T2.json"));
  CHECK(sdoc.contains("irm_log"));
  const auto omega2 = rosyn::response_from_json(sdoc.at("omega").dump());
  CHECK((omega2.L - omega.L).norm() == 0.0);
}

TEST_CASE("determinism: identical runs produce identical bytes") {
  TempDir d1("rosyn_det_a"), d2("rosyn_det_b");
  const auto c1 = rosyn::ExperimentConfig::from_json_text(
      demo_config(d1.path.string(), "", "[\"hinf\"]"));
  const auto c2 = rosyn::ExperimentConfig::from_json_text(
      demo_config(d2.path.string(), "", "[\"hinf\"]"));
  REQUIRE(rosyn::cmd_synthesize(c1) == rosyn::RunStatus::Ok);
  REQUIRE(rosyn::cmd_synthesize(c2) == rosyn::RunStatus::Ok);
  CHECK(slurp(d1.path / "summary.csv") == slurp(d2.path / "summary.csv"));
  CHECK(slurp(d1.path / "controller.json") ==
        slurp(d2.path / "controller.json"));
  CHECK(slurp(d1.path / "certificate.json") ==
        slurp(d2.path / "certificate.json"));
}

TEST_CASE("attack artifacts agree with the certificate") {
  TempDir dir("rosyn_test_attack");
  const auto config = rosyn::ExperimentConfig::from_json_text(
      demo_config(dir.path.string(), "", "[\"hinf\"]"));
  REQUIRE(rosyn::cmd_synthesize(config) == rosyn::RunStatus::Ok);
  REQUIRE(rosyn::cmd_attack(config,
                            (dir.path / "controller.json").string()) ==
          rosyn::RunStatus::Ok);
  const std::string attack = slurp(dir.path / "attack.json");
  CHECK(attack.find("\"stealth_level\"") != std::string::npos);
  const std::string traj = slurp(dir.path / "trajectory.csv");
  CHECK(traj.find("cumulative_stealth") != std::string::npos);
}

TEST_CASE("compare emits the table, plots, and stealth-bounded curves") {
  TempDir dir("rosyn_test_compare");
  const auto config = rosyn::ExperimentConfig::from_json_text(
      demo_config(dir.path.string(), ""));
  REQUIRE(rosyn::cmd_compare(config) == rosyn::RunStatus::Ok);
  const std::string table = slurp(dir.path / "comparison.csv");
  CHECK(table.find("controller,T=2") == 0);
  CHECK(table.find("improvement_factor") != std::string::npos);

  // the table's baseline cell is recomputable from the emitted controller
  const auto cdoc = nlohmann::json::parse(
      slurp(dir.path / "controller_hinf_T2.json"));
  const auto omega = rosyn::response_from_json(cdoc.at("omega").dump());
  const auto plant = config.plant.build(2);
  const auto cert = rosyn::regret_metric(omega, rosyn::lift(plant),
                                         rosyn::StealthSpec(config.alpha));
  std::istringstream tin(table);
  std::string line;
  double table_mu = -1.0;
  while (std::getline(tin, line)) {
    if (line.rfind("hinf,", 0) == 0) {
      table_mu = std::stod(line.substr(5));
    }
  }
  REQUIRE(cert.status == rosyn::RegretStatus::Optimal);
  CHECK(std::abs(table_mu - cert.mu_star) <=
        1e-6 * std::max(1.0, cert.mu_star));
  const std::string svg = slurp(dir.path / "stealth.svg");
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"")
        != std::string::npos);
  CHECK(fs::exists(dir.path / "regret_bars.svg"));
  CHECK(fs::exists(dir.path / "regulated_output.svg"));
  CHECK(fs::exists(dir.path / "regulated_output.csv"));

  // every cumulative stealth curve ends at or below the budget
  std::istringstream sc(slurp(dir.path / "stealth_trajectory.csv"));
  std::string last;
  std::getline(sc, line);  // header
  while (std::getline(sc, line)) {
    if (!line.empty()) last = line;
  }
  std::istringstream ls(last);
  std::string cell;
  std::getline(ls, cell, ',');  // k
  while (std::getline(ls, cell, ',')) {
    CHECK(std::stod(cell) <= 0.1 + 1e-6);
  }
}

TEST_CASE("compare without a baseline is a config error") {
  TempDir dir("rosyn_test_compare_bad");
  const auto config = rosyn::ExperimentConfig::from_json_text(demo_config(
      dir.path.string(), "", "[\"shor_plus_eval\", \"fixed_lambda_irm\"]"));
  CHECK(rosyn::cmd_compare(config) == rosyn::RunStatus::ConfigError);
  CHECK(fs::exists(dir.path / "error.json"));
}

TEST_CASE("output directory override comes from the environment") {
  TempDir dir("rosyn_test_env");
  TempDir other("rosyn_test_env_override");
  setenv("ROSYN_OUTPUT_DIR", other.path.c_str(), 1);
  const auto config = rosyn::ExperimentConfig::from_json_text(
      demo_config(dir.path.string(), "", "[\"hinf\"]"));
  REQUIRE(rosyn::cmd_synthesize(config) == rosyn::RunStatus::Ok);
  unsetenv("ROSYN_OUTPUT_DIR");
  CHECK(fs::exists(other.path / "summary.csv"));
  CHECK_FALSE(fs::exists(dir.path / "summary.csv"));
}

}  // TEST_SUITE
