// Serial reference vs OpenMP kernels. Run with --benchmark_filter=... to
// narrow; thread counts come from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cstdlib>

#include "fusionspec/inference.hpp"
#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/parallel.hpp"
#include "fusionspec/reference.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

using namespace fusionspec;
using rngkit::Purpose;

namespace {

rngkit::DataCloud make_cloud(int n) {
    return rngkit::sample_gaussian_cloud(n, n / 2, {1, 0, Purpose::XCloud});
}

void bm_affinity_serial(benchmark::State& state) {
    const auto cloud = make_cloud(static_cast<int>(state.range(0)));
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    for (auto _ : state) {
        auto b = ref::build_affinity(cloud, kernel);
        benchmark::DoNotOptimize(b.A.data());
    }
}

void bm_affinity_parallel(benchmark::State& state) {
    const auto cloud = make_cloud(static_cast<int>(state.range(0)));
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    for (auto _ : state) {
        auto b = kernelgraph::build_affinity(cloud, kernel);
        benchmark::DoNotOptimize(b.A.data());
    }
}

void bm_gauss_fill_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto c = ref::sample_gaussian_cloud(n, n, {3, 0, Purpose::XCloud});
        benchmark::DoNotOptimize(c.data.data());
    }
}

void bm_gauss_fill_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto c = rngkit::sample_gaussian_cloud(n, n, {3, 0, Purpose::XCloud});
        benchmark::DoNotOptimize(c.data.data());
    }
}

// Replicate-level loop dominating calibration; serial baseline runs the same
// replicates with the parallel loop capped at one thread.
void bm_calibrate(benchmark::State& state) {
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    set_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto t = inference::calibrate(100, 50, 50, kernel, 0.95, 10, 100,
                                      {9, 0, Purpose::Other});
        benchmark::DoNotOptimize(t.theta_star);
    }
}

}  // namespace

BENCHMARK(bm_affinity_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_affinity_parallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gauss_fill_serial)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gauss_fill_parallel)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_calibrate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    setenv("OPENBLAS_NUM_THREADS", "1", 0);
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
