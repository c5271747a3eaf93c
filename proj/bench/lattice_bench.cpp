#include <benchmark/benchmark.h>

#include <random>

#include "pcrf/lattice.hpp"

namespace {

using namespace pcrf;

ScoreTable random_table(const RuleSet& rules, int steps, TransitionMode mode) {
  auto t = ScoreTable::zeros(rules, steps, mode, true);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : t.emission) v = g(rng);
  for (auto& v : t.transition) v = g(rng);
  return t;
}

template <typename Fn>
void run(benchmark::State& state, TransitionMode mode, Fn fn) {
  const RuleSet& rules = shared_rule_set(22, 4);
  const int steps = static_cast<int>(state.range(0));
  const auto table = random_table(rules, steps, mode);
  for (auto _ : state) benchmark::DoNotOptimize(fn(table, rules));
  state.SetItemsProcessed(state.iterations() * steps);
}

void BM_ForwardParallel(benchmark::State& s) {
  run(s, TransitionMode::dynamic_sparse, [](const auto& t, const auto& r) { return forward_log_z(t, r); });
}
void BM_ForwardSerial(benchmark::State& s) {
  run(s, TransitionMode::dynamic_sparse, [](const auto& t, const auto& r) { return serial::forward_log_z(t, r); });
}
void BM_ViterbiParallel(benchmark::State& s) {
  run(s, TransitionMode::dynamic_sparse, [](const auto& t, const auto& r) { return viterbi_decode(t, r).score; });
}
void BM_ViterbiSerial(benchmark::State& s) {
  run(s, TransitionMode::dynamic_sparse,
      [](const auto& t, const auto& r) { return serial::viterbi_decode(t, r).score; });
}
void BM_ViterbiStaticDense(benchmark::State& s) {
  run(s, TransitionMode::static_dense, [](const auto& t, const auto& r) { return viterbi_decode(t, r).score; });
}

BENCHMARK(BM_ForwardParallel)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ViterbiParallel)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ViterbiSerial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ViterbiStaticDense)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
