#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rosyn/discretization.hpp"
#include "rosyn/ltv_system.hpp"
#include "rosyn/synthesis.hpp"

namespace rosyn {

/// Plant selection: the built-in spring-damper demo (replicated across any
/// horizon) or explicit per-step matrices with a fixed horizon.
struct PlantConfig {
  bool demo = true;
  SpringDamperParams demo_params;
  std::optional<LtvSystem> explicit_plant;

  LtvSystem build(int horizon) const;
};

/// Parsed experiment document. All randomness in downstream tooling is
/// derived from the mandatory seed; identical configs produce
/// byte-identical artifacts (wallclock reporting stays zero unless timing
/// is switched on).
/// Optional network-topology restriction applied on top of causality.
struct TopologyConfig {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
  Eigen::VectorXi node_of_state, node_of_input, node_of_output;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  double alpha = 0.1;
  std::vector<int> horizons;
  std::vector<SynthesisStrategy> strategies;
  SynthesisOptions search;
  PlantConfig plant;
  std::optional<TopologyConfig> topology;
  std::string output_dir = "out";
  bool timing = false;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

enum class RunStatus : int {
  Ok = 0,
  Infeasible = 2,
  SolverFailure = 3,
  ConfigError = 4,
};

/// Runs every configured (strategy, horizon) pair; writes controller and
/// certificate documents plus summary.csv into the output directory.
RunStatus cmd_synthesize(const ExperimentConfig& config);

/// Cross-controller comparison: comparison.csv with the per-horizon regret
/// of each strategy and the improvement-factor row, plus stealth, regret
/// and regulated-output plots (SVG with CSV backing) at the largest
/// horizon.
RunStatus cmd_compare(const ExperimentConfig& config);

/// Worst-case attack artifacts for a previously written controller file:
/// attack.json and the simulated trajectory.csv under that attack.
RunStatus cmd_attack(const ExperimentConfig& config,
                     const std::string& controller_path);

}  // namespace rosyn
