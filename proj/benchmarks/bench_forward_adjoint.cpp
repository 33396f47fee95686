#include <benchmark/benchmark.h>

#include <stirring/stirring.hpp>

using namespace stirring;

namespace {

ControlProblem cellular_problem(std::size_t np, std::size_t m) {
  const int orders[] = {1, 2};
  return {FlowBasis::cellular(orders, 1e-5), init_interface(UnitSquare{}, {0.5}, np), {1.0, m}};
}

void BM_Forward(benchmark::State& state) {
  const auto p = cellular_problem(static_cast<std::size_t>(state.range(0)), 200);
  const double c[] = {0.5, 0.5};
  const auto u = ControlSchedule::constant(p.grid, c);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p.initial, u, p.basis, p.forward));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Forward)->RangeMultiplier(2)->Range(2500, 40000)->Unit(benchmark::kMillisecond)->Complexity();

// One optimizer iteration's worth of work: forward solve, cost, adjoint gradient.
void BM_ForwardAdjoint(benchmark::State& state) {
  const auto p = cellular_problem(static_cast<std::size_t>(state.range(0)), 200);
  const double c[] = {0.5, 0.5};
  const auto u = ControlSchedule::constant(p.grid, c);
  for (auto _ : state) {
    const auto ev = evaluate(p, u);
    benchmark::DoNotOptimize(adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForwardAdjoint)->RangeMultiplier(2)->Range(2500, 40000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ForwardAdjointNewton(benchmark::State& state) {
  auto p = cellular_problem(static_cast<std::size_t>(state.range(0)), 200);
  p.forward.solver = MidpointSolver::newton();
  const double c[] = {0.5, 0.5};
  const auto u = ControlSchedule::constant(p.grid, c);
  for (auto _ : state) {
    const auto ev = evaluate(p, u);
    benchmark::DoNotOptimize(adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward));
  }
}
BENCHMARK(BM_ForwardAdjointNewton)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Checkpointed(benchmark::State& state) {
  auto p = cellular_problem(10000, 200);
  p.forward.checkpoint_every = static_cast<std::size_t>(state.range(0));
  const double c[] = {0.5, 0.5};
  const auto u = ControlSchedule::constant(p.grid, c);
  for (auto _ : state) {
    const auto ev = evaluate(p, u);
    benchmark::DoNotOptimize(adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward));
  }
}
BENCHMARK(BM_Checkpointed)->Arg(1)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_DoswellVelocity(benchmark::State& state) {
  const auto b = FlowBasis::doswell(FlowBasis::default_cluster(), 1e-5);
  const double c[] = {1.0, 1.0};
  double acc = 0.0;
  for (auto _ : state) {
    for (int i = 0; i < 1000; ++i) {
      const double t = 0.001 * i;
      acc += b.combined_velocity(c, {0.3 + 0.4 * t, 0.5}).x;
    }
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_DoswellVelocity);

}  // namespace
