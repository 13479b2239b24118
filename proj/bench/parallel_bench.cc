// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/observability.hpp"
#include "nlheat/parallel.hpp"

namespace nlheat {
namespace {

const Domain kDomain(1.0, 0.3, 0.8);
const GaussianKernel kGaussian{5.0, 0.2};

void BM_ProjectKernelParallel(benchmark::State& state) {
  const SpectralBasis basis = build_basis(kDomain, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(project_kernel(kGaussian, basis));
  state.counters["workers"] = worker_count();
}

void BM_ProjectKernelSerial(benchmark::State& state) {
  const SpectralBasis basis = build_basis(kDomain, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::project_kernel_serial(kGaussian, basis));
}

void BM_ProjectKernelWorkers(benchmark::State& state) {
  const SpectralBasis basis = build_basis(kDomain, static_cast<int>(state.range(0)));
  set_worker_count(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(project_kernel(kGaussian, basis));
  set_worker_count(0);
}

void BM_CostSweep(benchmark::State& state) {
  SweepOptions opts;
  opts.coupling = Coupling::kInverseT;
  opts.parallel = state.range(0) != 0;
  const std::vector<double> horizons{0.4, 0.2, 0.1, 0.05, 0.025};
  for (auto _ : state) benchmark::DoNotOptimize(cost_sweep(kDomain, kGaussian, horizons, opts));
  state.SetLabel(opts.parallel ? "parallel" : "serial");
}

BENCHMARK(BM_ProjectKernelParallel)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectKernelSerial)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectKernelWorkers)
    ->ArgsProduct({{32}, {1, 2, 4, 8}})
    ->ArgNames({"N", "workers"})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace nlheat

BENCHMARK_MAIN();
