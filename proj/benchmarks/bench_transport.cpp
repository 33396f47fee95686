#include <benchmark/benchmark.h>

#include <stirring/stirring.hpp>

using namespace stirring;

namespace {

void BM_TransportSubstep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int orders[] = {1, 2};
  const auto b = FlowBasis::cellular(orders, 1.0);
  const double c[] = {0.5, 0.5};
  const auto u = ControlSchedule::constant({0.05, 10}, c);
  const auto theta = init_theta(n);
  std::size_t substeps = 0;
  for (auto _ : state) {
    const auto r = advect(theta, u, b, {});
    substeps += r.substeps;
    benchmark::DoNotOptimize(r.final_field.values.data());
  }
  state.counters["substeps"] = benchmark::Counter(static_cast<double>(substeps), benchmark::Counter::kAvgIterations);
  state.counters["per_substep"] =
      benchmark::Counter(static_cast<double>(substeps), benchmark::Counter::kIsRate | benchmark::Counter::kInvert);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TransportSubstep)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_MixNorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = init_theta(n);
  MixNormEvaluator eval(n);
  for (auto _ : state) benchmark::DoNotOptimize(eval(f));
}
BENCHMARK(BM_MixNorm)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMicrosecond);

}  // namespace
