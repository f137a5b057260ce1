// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "mcbf/baselines.hpp"
#include "mcbf/channel.hpp"
#include "mcbf/linalg.hpp"
#include "mcbf/rng.hpp"
#include "mcbf/sca.hpp"
#include "mcbf/sdr.hpp"

namespace {

using namespace mcbf;

ChannelSet channels(std::size_t M, std::size_t K, std::size_t Q, Scenario s, std::uint64_t seed) {
  ChannelGenConfig cfg;
  cfg.M = M;
  cfg.K = K;
  cfg.Q = Q;
  cfg.scenario = s;
  cfg.seed = seed;
  return generate(cfg);
}

HermitianMatrix random_psd(std::size_t n, Rng& rng) {
  HermitianMatrix h(n);
  CVector x(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.complex_normal();
    h.add_outer(1.0, x.view());
  }
  return h;
}

void BM_HermEig(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1, 0);
  const HermitianMatrix h = random_psd(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(herm_eig(h));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HermEig)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_SdrSolve(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const auto K = static_cast<std::size_t>(state.range(1));
  const auto s = state.range(2) ? Scenario::Homogeneous : Scenario::General;
  const ChannelSet cs = channels(M, K, state.range(2) ? 2 : 3, s, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sdr_solve(cs));
}
BENCHMARK(BM_SdrSolve)->Args({8, 10, 1})->Args({16, 30, 1})->Args({8, 20, 0})->Args({16, 36, 0})
    ->Unit(benchmark::kMillisecond);

void BM_Randomize(benchmark::State& state) {
  const ChannelSet cs = channels(8, 10, 2, Scenario::Homogeneous, 4);
  const SdrSolution sol = sdr_solve(cs);
  const auto L = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(randomize(sol, cs, L, 5));
}
BENCHMARK(BM_Randomize)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Dfgp(benchmark::State& state) {
  const ChannelSet cs = channels(16, static_cast<std::size_t>(state.range(0)), 3, Scenario::General, 6);
  const QpInstance qp = build_qp(make_feasible_start(cs, 7), cs);
  for (auto _ : state) benchmark::DoNotOptimize(dfgp_solve(qp, 400));
}
BENCHMARK(BM_Dfgp)->Arg(24)->Arg(48)->Arg(72);

void BM_ScaSolve(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const auto K = static_cast<std::size_t>(state.range(1));
  const ChannelSet cs = channels(M, K, 3, Scenario::General, 8);
  ScaOptions opts;
  opts.seed = 9;
  for (auto _ : state) benchmark::DoNotOptimize(sca_solve(cs, std::nullopt, opts));
}
BENCHMARK(BM_ScaSolve)->Args({16, 36})->Args({32, 72})->Unit(benchmark::kMillisecond);

void BM_Baselines(benchmark::State& state) {
  const ChannelSet cs = channels(16, 36, 3, Scenario::General, 10);
  const ScaOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(one_group(cs, opts, 11));
    benchmark::DoNotOptimize(equipartition(cs, opts, 12));
  }
}
BENCHMARK(BM_Baselines)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
