#include <benchmark/benchmark.h>

#include <memory>

#include "mcflab/arrival.hpp"
#include "mcflab/flowline.hpp"
#include "mcflab/frequency.hpp"
#include "mcflab/mcf.hpp"
#include "mcflab/spectral.hpp"

using namespace mcf;

static void BM_StepMcf(benchmark::State& state) {
  const auto s = make_sphere(2, 1.0, static_cast<std::size_t>(state.range(0)));
  const double dt = 0.5 * cfl_bound(s);
  for (auto _ : state) benchmark::DoNotOptimize(step_mcf(s, dt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepMcf)->Arg(256)->Arg(1024);

static void BM_GaussianArea(benchmark::State& state) {
  const auto s = make_sphere(2, 2.0, 512);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_area(s).value);
}
BENCHMARK(BM_GaussianArea);

static void BM_ArrivalCircle(benchmark::State& state) {
  ArrivalConfig cfg;
  cfg.h = 1.0 / static_cast<double>(state.range(0));
  const auto c = make_circle(1.0, 512);
  for (auto _ : state) benchmark::DoNotOptimize(compute_arrival(c, cfg).size());
}
BENCHMARK(BM_ArrivalCircle)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_TraceSphereField(benchmark::State& state) {
  auto f = std::make_shared<ArrivalField>(sample_field(
      VecX::Constant(3, -1.0), VecX::Constant(3, 1.0), 1.0 / 32, [](const VecX& x) { return -x.squaredNorm() / 4; },
      [](const VecX& x) { return x.norm() < 0.95; }));
  const auto ev = interpolate(f);
  VecX x0(3);
  x0 << 0.5, 0.3, 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(trace(ev, x0).length);
}
BENCHMARK(BM_TraceSphereField)->Unit(benchmark::kMillisecond);

static void BM_KernelProject(benchmark::State& state) {
  const auto basis = kernel_basis(2, 1);
  const auto w = DriftFunction::cylinder(2, 1, basis[0].polynomial() * 0.3);
  const auto cyl = ShrinkerCylinder::standard(2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_project(w, cyl).remainder_sup);
}
BENCHMARK(BM_KernelProject)->Unit(benchmark::kMillisecond);

static void BM_Frequency(benchmark::State& state) {
  FrequencyProblem p;
  p.n = 3;
  p.u = DriftFunction::flat(hermite_eigen(3, 2)[0]);
  p.lambda = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(frequency(p, 3.0).U);
}
BENCHMARK(BM_Frequency)->Unit(benchmark::kMillisecond);

static void BM_Dichotomy(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dichotomy_probe(3, 1.0, 1.0, 1.0, 1.0).R1);
}
BENCHMARK(BM_Dichotomy)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
