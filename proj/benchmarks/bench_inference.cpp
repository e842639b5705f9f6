// Per-sweep cost of the Gibbs sampler and the mean-field engine, and how it
// scales with the number of subcarriers.

#include <benchmark/benchmark.h>

#include "modclass/gibbs.hpp"
#include "modclass/meanfield.hpp"
#include "modclass/problem.hpp"
#include "modclass/sigmodel.hpp"

namespace {

using namespace modclass;

Scenario scenario(int N, int L) {
  Scenario s;
  s.N = N;
  s.L = s.L_hat = L;
  if (L != 5) s.tap_powers_db.assign(L, 0.0);
  s.snr_db = 10.0;
  return s;
}

InferenceProblem make_problem(const Scenario& s, std::uint64_t seed) {
  RandomStream rng(seed);
  auto syn = synthesize(s, rng);
  return InferenceProblem(syn.rx, s.pool, s.Mt, s.L_hat);
}

void BM_GibbsSweep(benchmark::State& st) {
  const auto s = scenario(static_cast<int>(st.range(0)), 5);
  const auto problem = make_problem(s, 11);
  auto cfg = default_inference_config(problem.pool.size(), s.N, s.K, s.Mt);
  GibbsSampler sampler(problem, cfg);
  RandomStream rng(12);
  sampler.initialize(rng);
  int m = 1;
  for (auto _ : st) {
    sampler.sweep(m++, rng);
    benchmark::DoNotOptimize(sampler.state().sigma2);
  }
  st.SetComplexityN(st.range(0));
  st.counters["symbols"] = problem.symbol_count();
}
BENCHMARK(BM_GibbsSweep)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oN);

void BM_MeanFieldSweep(benchmark::State& st) {
  const auto s = scenario(static_cast<int>(st.range(0)), 5);
  const auto problem = make_problem(s, 21);
  auto cfg = default_inference_config(problem.pool.size(), s.N, s.K, s.Mt);
  MeanFieldEngine engine(problem, cfg);
  RandomStream rng(22);
  engine.initialize(rng);
  for (auto _ : st) {
    engine.sweep();
    benchmark::DoNotOptimize(engine.state().beta);
  }
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_MeanFieldSweep)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oN);

void BM_FreeEnergy(benchmark::State& st) {
  const auto s = scenario(128, 5);
  const auto problem = make_problem(s, 31);
  auto cfg = default_inference_config(problem.pool.size(), s.N, s.K, s.Mt);
  MeanFieldEngine engine(problem, cfg);
  RandomStream rng(32);
  engine.initialize(rng);
  engine.sweep();
  for (auto _ : st) benchmark::DoNotOptimize(engine.free_energy());
}
BENCHMARK(BM_FreeEnergy);

void BM_GibbsSweepTaps(benchmark::State& st) {
  const auto s = scenario(128, static_cast<int>(st.range(0)));
  const auto problem = make_problem(s, 41);
  auto cfg = default_inference_config(problem.pool.size(), s.N, s.K, s.Mt);
  GibbsSampler sampler(problem, cfg);
  RandomStream rng(42);
  sampler.initialize(rng);
  int m = 1;
  for (auto _ : st) sampler.sweep(m++, rng);
}
BENCHMARK(BM_GibbsSweepTaps)->DenseRange(1, 7, 2);

void BM_Synthesize(benchmark::State& st) {
  const auto s = scenario(128, 5);
  RandomStream rng(51);
  for (auto _ : st) benchmark::DoNotOptimize(synthesize(s, rng));
}
BENCHMARK(BM_Synthesize);

}  // namespace

BENCHMARK_MAIN();
