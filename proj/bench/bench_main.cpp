// Serial reference paths against their OpenMP counterparts.
#include "covlaw/models.hpp"
#include "covlaw/moments.hpp"
#include "covlaw/sampler.hpp"

#include <benchmark/benchmark.h>

using namespace covlaw;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

const models::KernelSpec& band_spec() {
    static const models::KernelSpec k =
        models::band_kernel(models::PiecewiseLinear({0.0, 0.6, 1.0}, {1.0, 1.0, 0.0}), 0.25);
    return k;
}

void BM_DiscretizeTable(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto& h = *band_spec().find("1", "1");
    for (auto _ : state) benchmark::DoNotOptimize(models::discretize_table(h, n, {}, exec_of(state)));
}

void BM_SampleKernel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto eta = models::discretize(band_spec(), n);
    std::uint64_t s = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_kernel(eta, SeedSpec{1, "bench", std::uint64_t(n), s++, 0}, exec_of(state)));
}

void BM_WickExact(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto eta = models::gue(n);
    WickOptions opt;
    opt.exec = exec_of(state);
    const std::vector<Matrix> ones(7, Matrix::Identity(n, n));
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_moment_exact(eta, std::vector<std::string>(6, "1"), ones, opt));
}

void BM_SemicircularPartitionSum(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    const auto eta = models::band(models::PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}), 0.3, 64);
    const std::vector<Matrix> ones(l + 1, Matrix::Identity(64, 64));
    for (auto _ : state)
        benchmark::DoNotOptimize(semicircular_expectation(eta, std::vector<std::string>(l, "1"), ones,
                                                          MomentMethod::PartitionSum, exec_of(state)));
}

void BM_SemicircularIntervalRecursion(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    const auto eta = models::band(models::PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}), 0.3, 64);
    const std::vector<Matrix> ones(l + 1, Matrix::Identity(64, 64));
    for (auto _ : state)
        benchmark::DoNotOptimize(semicircular_expectation(eta, std::vector<std::string>(l, "1"), ones));
}

}  // namespace

BENCHMARK(BM_DiscretizeTable)->ArgsProduct({{256, 1024}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleKernel)->ArgsProduct({{256, 1024}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WickExact)->ArgsProduct({{3, 4}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SemicircularPartitionSum)->ArgsProduct({{8, 12}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SemicircularIntervalRecursion)->Arg(8)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
