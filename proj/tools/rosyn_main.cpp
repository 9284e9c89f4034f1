#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "rosyn/experiment.hpp"

namespace {

int run_guarded(const std::string& config_path,
                const std::function<rosyn::RunStatus(
                    const rosyn::ExperimentConfig&)>& body) {
  try {
    const rosyn::ExperimentConfig config =
        rosyn::ExperimentConfig::from_file(config_path);
    return static_cast<int>(body(config));
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return static_cast<int>(rosyn::RunStatus::ConfigError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(rosyn::RunStatus::SolverFailure);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Finite-horizon controller synthesis against stealthy attacks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string controller_path;

  CLI::App* synth =
      app.add_subcommand("synthesize", "Synthesize controllers and write "
                                       "controller/certificate artifacts");
  synth->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();

  CLI::App* compare =
      app.add_subcommand("compare", "Compare configured controllers across "
                                    "horizons; writes comparison.csv and "
                                    "SVG plots");
  compare->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();

  CLI::App* attack =
      app.add_subcommand("attack", "Compute and apply the worst-case "
                                   "stealthy attack for a controller file");
  attack->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();
  attack
      ->add_option("--controller", controller_path,
                   "controller JSON produced by synthesize")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return run_guarded(config_path, rosyn::cmd_synthesize);
  }
  if (compare->parsed()) {
    return run_guarded(config_path, rosyn::cmd_compare);
  }
  if (attack->parsed()) {
    return run_guarded(config_path, [&](const rosyn::ExperimentConfig& c) {
      return rosyn::cmd_attack(c, controller_path);
    });
  }
  return static_cast<int>(rosyn::RunStatus::ConfigError);
}
