#include <memory>

#include <benchmark/benchmark.h>

#include "markovopt/algorithms.hpp"
#include "markovopt/markov_chain.hpp"
#include "markovopt/mlmc.hpp"
#include "markovopt/oracles.hpp"
#include "markovopt/params.hpp"
#include "markovopt/problems.hpp"

using namespace markovopt;

namespace {

void BM_SampleNext(benchmark::State& state) {
  auto k = std::make_shared<FiniteMarkovKernel>(two_state_kernel(0.1));
  ChainSampler s(k, 1);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample_next());
}
BENCHMARK(BM_SampleNext);

void BM_Advance(benchmark::State& state) {
  auto k = std::make_shared<FiniteMarkovKernel>(two_state_kernel(0.01));
  ChainSampler s(k, 1);
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    s.advance(steps);
    benchmark::DoNotOptimize(s.current_state());
  }
}
BENCHMARK(BM_Advance)->Arg(16)->Arg(1024)->Arg(1 << 20);

void BM_Accumulate(benchmark::State& state) {
  const auto k = two_state_kernel(0.1);
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto p = build_hard_instance(1.0, 100.0, d);
  const auto o = masked_gradient_oracle(p, k);
  std::vector<StateIndex> states(256);
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = i % 2;
  const Vector x = Vector::Ones(static_cast<Eigen::Index>(d));
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(d));
  for (auto _ : state) {
    o->accumulate(x, states.data(), states.size(), sum);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(states.size()));
}
BENCHMARK(BM_Accumulate)->Arg(10)->Arg(100);

void BM_MlmcGradient(benchmark::State& state) {
  auto k = std::make_shared<FiniteMarkovKernel>(two_state_kernel(0.1));
  const auto p = build_hard_instance(1.0, 100.0, 100);
  const auto o = masked_gradient_oracle(p, *k);
  ChainSampler s(k, 1);
  Rng rng(2);
  const EstimatorConfig cfg{static_cast<std::uint64_t>(state.range(0)), 64.0};
  const Vector x = Vector::Ones(100);
  for (auto _ : state) benchmark::DoNotOptimize(mlmc_gradient(*o, s, x, cfg, rng).vector);
}
BENCHMARK(BM_MlmcGradient)->Arg(1)->Arg(16);

void BM_RasgdIterations(benchmark::State& state) {
  auto k = std::make_shared<FiniteMarkovKernel>(two_state_kernel(0.1));
  const auto p = build_hard_instance(1.0, 100.0, 100);
  const auto o = masked_gradient_oracle(p, *k);
  const int tau = mixing_time(*k, 1000).tau;
  const auto params = rasgd_params(p->smoothness(), 1.0, 1.0, tau, tau,
                                   rasgd_max_gamma(p->smoothness()), 100);
  RunOptions opt;
  opt.metrics = {Metric::kDistSq};
  opt.record_every = 100;
  for (auto _ : state) {
    ChainSampler s(k, 1);
    benchmark::DoNotOptimize(run_rasgd(*p, *o, s, params, Vector::Zero(100), opt).final_x);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RasgdIterations)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
