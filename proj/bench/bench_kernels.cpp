// Serial reference against OpenMP path for each data-parallel kernel.
// Second argument of every benchmark: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "wavecone/kernels.hpp"
#include "wavecone/measure.hpp"

using namespace wavecone;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

void BM_ScreenPlanes(benchmark::State& state) {
  const OperatorSpec op = builtin_operator("cubic3d");
  const AppliedSymbol symbol(op, Vector::Ones(1));
  const auto planes = plane_grid(2, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(screen_planes(symbol, planes, 16, mode(state)));
  state.counters["planes"] = static_cast<double>(planes.size());
}
BENCHMARK(BM_ScreenPlanes)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SweepPlanes(benchmark::State& state) {
  const OperatorSpec op = builtin_operator("sextic3d");
  const auto planes = plane_grid(2, 3, static_cast<int>(state.range(0)));
  ConeConfig cfg;
  cfg.execution = Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(sweep_planes(op, Vector::Unit(2, 0), planes, cfg, mode(state)));
}
BENCHMARK(BM_SweepPlanes)->ArgsProduct({{8}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SymbolSingularValues(benchmark::State& state) {
  const PrincipalSymbol symbol(builtin_operator("curlcurl", {3, 3}));
  const auto dirs = quasi_uniform_sphere(3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(symbol_singular_values(symbol, dirs, mode(state)));
}
BENCHMARK(BM_SymbolSingularValues)->ArgsProduct({{10000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_FourierResidual(benchmark::State& state) {
  const OperatorSpec op = builtin_operator("div-matrix", {3, 3});
  const Plane pi = Plane::coordinate(3, {1, 2});
  const DiscreteMeasure mu =
      model_rectifiable_measure(admissible_polar_set(op, pi).col(0), pi, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_afree_fft(op, mu, 1e-9, DerivativeSymbol::centered, mode(state)));
}
BENCHMARK(BM_FourierResidual)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_IntegralGeometry(benchmark::State& state) {
  PolyhedralSet set{3, 2, {}};
  Matrix tri(3, 3);
  tri << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  for (int i = 0; i < 16; ++i) set.simplices.push_back(tri.array() + 0.1 * i);
  for (auto _ : state) benchmark::DoNotOptimize(integral_geometric_measure(set, 2, state.range(0), 7, mode(state)));
}
BENCHMARK(BM_IntegralGeometry)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
