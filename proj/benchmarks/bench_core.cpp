#include <benchmark/benchmark.h>

#include "ratelab/bounds.hpp"
#include "ratelab/distributions.hpp"
#include "ratelab/quantization.hpp"
#include "ratelab/rng.hpp"

using namespace ratelab;

static void BM_PhiloxBlock(benchmark::State& state) {
    uint64_t ctr = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(Philox4x32::block(42, 0, ctr++));
    }
}
BENCHMARK(BM_PhiloxBlock);

static void BM_SampleGaussian(benchmark::State& state) {
    const DistributionSpec spec{Gaussian{0.0, 1.0}, 1};
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample(spec, n, 7));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SampleGaussian)->Arg(1 << 10)->Arg(1 << 14);

static void BM_SampleStudentT(benchmark::State& state) {
    const DistributionSpec spec{StudentT{30.0, 1.0}, 1};
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample(spec, n, 7));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SampleStudentT)->Arg(1 << 10)->Arg(1 << 14);

static void BM_ErmExact1D(benchmark::State& state) {
    const DistributionSpec spec{StudentT{30.0, 1.0}, 1};
    const Sample s = sample(spec, static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(erm(s, 2, 10.0, ErmStrategy::Exact1D));
    }
}
BENCHMARK(BM_ErmExact1D)->Arg(1 << 10)->Arg(1 << 13)->Arg(1 << 16);

static void BM_EmpiricalRisk(benchmark::State& state) {
    const DistributionSpec spec{Gaussian{0.0, 1.0}, 1};
    const Sample s = sample(spec, static_cast<std::size_t>(state.range(0)), 3);
    Codebook cb{{-0.8, 0.8}, 2, 1, 4.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(empirical_risk(cb, s));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_EmpiricalRisk)->Arg(1 << 14)->Arg(1 << 20);

static void BM_LedererTail(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(lederer_tail(1e4, 8.0, 2.0, 0.1, 8.0, 1.0));
    }
}
BENCHMARK(BM_LedererTail);

BENCHMARK_MAIN();
