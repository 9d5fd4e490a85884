#include <benchmark/benchmark.h>

#include "nle/kernel_velocity.hpp"
#include "nle/local_eikonal.hpp"
#include "nle/slepcev_engine.hpp"

using namespace nle;

namespace {

Grid grid_for(int dim, int n) { return Grid::make(dim, 2.0, n); }

OccupancyField disk_occupancy(const Grid& g) {
    return OccupancyField::from_indicator(superlevel_indicator(make_signed_initial(g, DiskShape{{0.0, 0.0}, 0.6}), 0.0, false));
}

void convolve_backend(benchmark::State& state, ConvolutionBackend backend) {
    const int dim = int(state.range(0)), n = int(state.range(1));
    const Grid g = grid_for(dim, n);
    const KernelSpec k = KernelSpec::gaussian_truncated(dim, g.h(), 0.2, 0.6, 1.0);
    const OccupancyField occ = disk_occupancy(g);
    for (auto _ : state) benchmark::DoNotOptimize(convolve(k, occ, 0.0, backend));
    state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}

void BM_convolve_direct(benchmark::State& s) { convolve_backend(s, ConvolutionBackend::direct); }
void BM_convolve_fft(benchmark::State& s) { convolve_backend(s, ConvolutionBackend::fft); }

void BM_eikonal_step(benchmark::State& state) {
    const int dim = int(state.range(0)), n = int(state.range(1));
    const Grid g = grid_for(dim, n);
    const ScalarField u = make_signed_initial(g, DiskShape{{0.0, 0.0}, 0.6});
    const SpeedField a = SpeedField::constant(g, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(eikonal_step(u, a, 0.5 * g.h()));
    state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}

void BM_slepcev_step(benchmark::State& state) {
    const int dim = int(state.range(0)), n = int(state.range(1));
    const Grid g = grid_for(dim, n);
    const KernelSpec k = KernelSpec::gaussian_truncated(dim, g.h(), 0.2, 0.6, 1.0);
    Convolver conv(k, g);
    const ExternalVelocity c1 = ExternalVelocity::constant(0.5);
    const ScalarField u = make_signed_initial(g, DiskShape{{0.0, 0.0}, 0.6});
    for (auto _ : state) benchmark::DoNotOptimize(slepcev_step(u, conv, c1, 0.25 * g.h()));
    state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}

}  // namespace

BENCHMARK(BM_convolve_direct)->Args({1, 801})->Args({2, 101});
BENCHMARK(BM_convolve_fft)->Args({1, 801})->Args({2, 101})->Args({2, 201});
BENCHMARK(BM_eikonal_step)->Args({1, 801})->Args({2, 201});
BENCHMARK(BM_slepcev_step)->Args({1, 801})->Args({2, 101});
BENCHMARK_MAIN();
