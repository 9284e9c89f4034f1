#include <benchmark/benchmark.h>

#include "rosyn/discretization.hpp"
#include "rosyn/lifted_system.hpp"
#include "rosyn/simulate.hpp"
#include "rosyn/sls.hpp"

namespace {

void BM_Lift(benchmark::State& state) {
  const auto sys = rosyn::spring_damper_demo_plant(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto lifted = rosyn::lift(sys);
    benchmark::DoNotOptimize(lifted.ZA);
  }
}
BENCHMARK(BM_Lift)->Arg(2)->Arg(5)->Arg(10);

void BM_ClosedLoopMaps(benchmark::State& state) {
  const auto sys = rosyn::spring_damper_demo_plant(static_cast<int>(state.range(0)));
  const auto lifted = rosyn::lift(sys);
  const auto omega = rosyn::response_from_gain(
      Eigen::MatrixXd::Zero(lifted.Nu, lifted.Ny), lifted);
  for (auto _ : state) {
    auto maps = rosyn::closed_loop_maps(omega, lifted);
    benchmark::DoNotOptimize(maps.psi);
  }
}
BENCHMARK(BM_ClosedLoopMaps)->Arg(2)->Arg(5)->Arg(10);

void BM_Simulate(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const auto sys = rosyn::spring_damper_demo_plant(T);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(4);
  const Eigen::MatrixXd u = Eigen::MatrixXd::Ones(T + 1, 1);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(T, 1);
  for (auto _ : state) {
    auto traj = rosyn::simulate(sys, x0, u, a);
    benchmark::DoNotOptimize(traj.z);
  }
}
BENCHMARK(BM_Simulate)->Arg(5)->Arg(50);

void BM_Expm(benchmark::State& state) {
  const auto [Ac, Bc] = rosyn::spring_damper_continuous({});
  for (auto _ : state) {
    auto pair = rosyn::discretize_zoh({Ac, Bc, 0.5});
    benchmark::DoNotOptimize(pair.first);
  }
}
BENCHMARK(BM_Expm);

}  // namespace
