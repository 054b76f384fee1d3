#include <benchmark/benchmark.h>

#include "p3/catalog.hpp"
#include "p3/solve.hpp"
#include "p3/verify.hpp"

using namespace p3;

static void BM_parse(benchmark::State& state) {
  const std::string src = "x3*sec(x1) + a*x2 - x3^2*tan(x1)/(1+x1^2)";
  for (auto _ : state) benchmark::DoNotOptimize(parse(src));
}
BENCHMARK(BM_parse);

static void BM_eval(benchmark::State& state) {
  Model3D m = euler_top();
  const Expression e = m.invariant("H");
  const Vec3 x{0.7, 1.1, 1.9};
  for (auto _ : state) benchmark::DoNotOptimize(eval(e, x, m.params));
}
BENCHMARK(BM_eval);

static void BM_diff(benchmark::State& state) {
  Model3D m = ice_skate();
  const Expression e = m.invariant("H1");
  for (auto _ : state) benchmark::DoNotOptimize(diff(e, 1));
}
BENCHMARK(BM_diff);

static void BM_tensor_assembly(benchmark::State& state) {
  Model3D m = euler_top();
  const Expression H = m.invariant("H");
  const Expression J = parse("-x3");
  for (auto _ : state)
    benchmark::DoNotOptimize(
        lie_tensor_from_J(m, H, J, AxisPermutation::identity()));
}
BENCHMARK(BM_tensor_assembly);

static void BM_jacobi_residual(benchmark::State& state) {
  Model3D m = euler_top();
  const LieTensor t = lie_tensor_from_J(m, m.invariant("H"), parse("-x3"),
                                        AxisPermutation::identity());
  SampleBox box = m.box;
  box.samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_residual(m, t, box));
}
BENCHMARK(BM_jacobi_residual)->Arg(100)->Arg(1000);

static void BM_characteristics(benchmark::State& state) {
  Model3D m = euler_top();
  const ABPair ab =
      compute_AB(m, m.invariant("H"), AxisPermutation::identity());
  for (auto _ : state)
    benchmark::DoNotOptimize(
        integrate_characteristics(m, ab, {1, 1, 1}, -1.0, 1.0, 1e-3));
}
BENCHMARK(BM_characteristics);

BENCHMARK_MAIN();
