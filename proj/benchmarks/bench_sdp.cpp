#include <benchmark/benchmark.h>

#include "rosyn/discretization.hpp"
#include "rosyn/lifted_system.hpp"
#include "rosyn/regret.hpp"
#include "rosyn/sls.hpp"

namespace {

// Single-variable certificate program at growing horizons.
void BM_RegretMetric(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const auto sys = rosyn::spring_damper_demo_plant(T);
  const auto lifted = rosyn::lift(sys);
  const auto omega = rosyn::response_from_gain(
      Eigen::MatrixXd::Zero(lifted.Nu, lifted.Ny), lifted);
  const auto maps = rosyn::closed_loop_maps(omega, lifted);
  const auto clair = rosyn::clairvoyant(lifted);
  const rosyn::StealthSpec spec(0.1);
  for (auto _ : state) {
    auto cert = rosyn::regret_metric_from_maps(maps, clair.Q, spec);
    benchmark::DoNotOptimize(cert.mu_star);
  }
  state.SetLabel("Na=" + std::to_string(lifted.Na));
}
BENCHMARK(BM_RegretMetric)->Arg(2)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MinEigVec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd S = Eigen::MatrixXd::Random(n, n);
  S = (0.5 * (S + S.transpose())).eval();
  for (auto _ : state) {
    auto pair = rosyn::min_eig_vec(S);
    benchmark::DoNotOptimize(pair.second);
  }
}
BENCHMARK(BM_MinEigVec)->Arg(30)->Arg(100);

}  // namespace
