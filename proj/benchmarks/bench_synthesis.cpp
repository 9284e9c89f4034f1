#include <benchmark/benchmark.h>

#include "rosyn/discretization.hpp"
#include "rosyn/synthesis.hpp"

namespace {

void BM_HinfSynthesis(benchmark::State& state) {
  const auto sys = rosyn::spring_damper_demo_plant(static_cast<int>(state.range(0)));
  const rosyn::StealthSpec spec(0.1);
  for (auto _ : state) {
    auto result = rosyn::hinf_synthesis(sys, spec);
    benchmark::DoNotOptimize(result.lambda);
  }
  state.SetLabel("baseline program");
}
BENCHMARK(BM_HinfSynthesis)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

// One rank-relaxed fixed-lambda solve: the inner kernel of both search
// strategies.
void BM_FixedLambdaRelaxed(benchmark::State& state) {
  const auto sys = rosyn::spring_damper_demo_plant(static_cast<int>(state.range(0)));
  const rosyn::StealthSpec spec(0.1);
  const auto hinf = rosyn::hinf_synthesis(sys, spec);
  rosyn::SynthesisOptions opts;
  opts.max_irm_iters = 1;
  for (auto _ : state) {
    auto result = rosyn::fixed_lambda_synthesis(
        sys, spec, hinf.certificate.lambda_star, std::nullopt, opts);
    benchmark::DoNotOptimize(result->certificate.mu_star);
  }
  state.SetLabel("one lifted solve");
}
BENCHMARK(BM_FixedLambdaRelaxed)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
