#include <benchmark/benchmark.h>

#include "ksfrac/analysis.hpp"
#include "ksfrac/energy.hpp"
#include "ksfrac/harmonic.hpp"
#include "ksfrac/heat.hpp"

using namespace ksfrac;

namespace {

const IfsSpec& family_of(const benchmark::State& state) {
  return state.range(0) == 0 ? IfsSpec::vicsek() : IfsSpec::gasket();
}

void BM_LevelGraph(benchmark::State& state) {
  const IfsSpec& spec = family_of(state);
  const int level = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_level_graph(spec, level).edge_count());
}
BENCHMARK(BM_LevelGraph)->Args({0, 5})->Args({1, 8})->Unit(benchmark::kMillisecond);

void BM_KsProfile(benchmark::State& state) {
  const IfsSpec& spec = family_of(state);
  const int level = static_cast<int>(state.range(1));
  const DiscreteMeasure mu = build_measure(spec, level);
  const auto oracle = make_oracle(mu, Metric::Euclidean);
  const CellFunction f = evaluate(fn::Coordinate{0}, mu);
  const auto radii = scan_radii(spec, level, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ks_profile(f, mu, *oracle, 2.0, radii));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mu.size()));
}
BENCHMARK(BM_KsProfile)->Args({0, 4})->Args({0, 5})->Args({1, 6})->Args({1, 7})
    ->Unit(benchmark::kMillisecond);

void BM_CellSolve(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0)) / 2.0;
  const Triple a{1.0, 0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(cell_solve_iterative(a, p).interior);
}
BENCHMARK(BM_CellSolve)->Arg(3)->Arg(4)->Arg(6)->Arg(8);

void BM_EstimateRp(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_rp(p, 8).r_hat);
}
BENCHMARK(BM_EstimateRp)->Arg(3)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_HeatBesov(benchmark::State& state) {
  const IfsSpec& spec = family_of(state);
  const LevelGraph g = build_level_graph(spec, static_cast<int>(state.range(1)));
  const WalkKernel walk(g);
  const VertexFunction f = evaluate(fn::Coordinate{0}, g);
  const auto times = dyadic_times(walk);
  for (auto _ : state) benchmark::DoNotOptimize(heat_besov_seminorm(f, walk, 2.0, 0.5, times).sup);
}
BENCHMARK(BM_HeatBesov)->Args({0, 4})->Args({1, 6})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
