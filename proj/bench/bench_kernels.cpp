// Serial reference vs OpenMP for the two data-parallel kernels.

#include <benchmark/benchmark.h>

#include "macauth/analyzer.hpp"
#include "macauth/coding.hpp"

namespace {

using namespace macauth;

Execution exec_of(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

void BM_RunTrials(benchmark::State& state) {
  const auto enc = crossover_encoder(0.1);
  TrialConfig c;
  c.n = static_cast<std::size_t>(state.range(1));
  c.rate = 0.6 * clean_rate(worked_example_channel(), enc);
  c.trials = 2000;
  c.seed = 2024;
  c.tp = TypicalityParams::schedule(c.n, 0.68);
  c.encoder = enc;
  c.channel = worked_example_channel();
  c.attack = AttackStrategy::iid_symbol({0, .5, .5});
  c.mode = CodebookMode::ensemble;
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.trials));
}
BENCHMARK(BM_RunTrials)->ArgNames({"parallel", "n"})->ArgsProduct({{0, 1}, {80, 160}})->Unit(benchmark::kMillisecond);

void BM_RunTrialsExplicit(benchmark::State& state) {
  const auto enc = crossover_encoder(0.1);
  TrialConfig c;
  c.n = 40;
  c.rate = 0.3;
  c.trials = 500;
  c.seed = 7;
  c.tp = TypicalityParams::schedule(c.n, 0.68);
  c.encoder = enc;
  c.channel = worked_example_channel();
  c.attack = AttackStrategy::silent();
  c.mode = CodebookMode::explicit_words;
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c, exec_of(state)));
}
BENCHMARK(BM_RunTrialsExplicit)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OptimizeRateBound(benchmark::State& state) {
  RateSearchConfig rs;
  rs.restarts = 16;
  const auto ch = worked_example_channel();
  for (auto _ : state) benchmark::DoNotOptimize(optimize_rate_bound(ch, 2, rs, exec_of(state)));
}
BENCHMARK(BM_OptimizeRateBound)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
