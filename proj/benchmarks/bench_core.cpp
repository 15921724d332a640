#include <benchmark/benchmark.h>

#include "ldg/analytic.hpp"
#include "ldg/continuation.hpp"
#include "ldg/solvers.hpp"

using namespace ldg;

namespace {

const BoundarySpec kBc = BoundarySpec::dirichlet(0.03);

QField d1_seed(int n) {
  const Grid g = make_grid({1.5, 1.0}, 1.0 / n);
  return theta_seed(g, theta_edges(ThetaState::D1), kBc);
}

void BM_ResidualEvaluate(benchmark::State& state) {
  const QField q = d1_seed(static_cast<int>(state.range(0)));
  const DiscreteModel model(q.grid, {0.1, kBc});
  QField r(q.grid);
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(q, &r));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(q.size()));
}
BENCHMARK(BM_ResidualEvaluate)->Arg(32)->Arg(64)->Arg(128);

void BM_NewtonSolve(benchmark::State& state) {
  const QField q = d1_seed(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(newton_solve(q, {0.1, kBc}).report.iterations);
}
BENCHMARK(BM_NewtonSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SmallestEigenvalue(benchmark::State& state) {
  const EnergyParams p{0.1, kBc};
  const QField q = newton_solve(d1_seed(static_cast<int>(state.range(0))), p).field;
  for (auto _ : state) benchmark::DoNotOptimize(smallest_eigenvalue(q, p).lambda_min);
}
BENCHMARK(BM_SmallestEigenvalue)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StrongSeries(benchmark::State& state) {
  const Grid g = make_grid({1.5, 1.0}, 1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sample_strong_limit(g, kBc.d).q11.data());
}
BENCHMARK(BM_StrongSeries)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RobinRoots(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(robin_roots(10.0, 1.0, static_cast<int>(state.range(0))).roots.back());
}
BENCHMARK(BM_RobinRoots)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
