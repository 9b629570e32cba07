// Serial versus OpenMP kernels. Both produce bit-identical results, so the
// only difference measured here is wall time.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "pubbias/kernels.hpp"
#include "pubbias/rng.hpp"

using namespace pubbias;

namespace {

const ModelSpec kModel{NormalZeroMean{3.0}, signed_threshold(2.0)};

void BM_PublishedMomentsSerial(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::published_moments(kModel, n, 1, FalseDefinition::NonPositive));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PublishedMomentsOmp(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    omp_set_num_threads(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(omp::published_moments(kModel, n, 1, FalseDefinition::NonPositive));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = static_cast<double>(state.range(1));
}

MonthCells synthetic_cells(int months, int per_month) {
    MonthCells cells;
    RngStream r(7, 0);
    for (int m = 0; m < months; ++m) {
        double sum = 0.0;
        for (int k = 0; k < per_month; ++k) sum += 0.5 + 4.0 * r.normal();
        cells.sum.push_back(sum);
        cells.count.push_back(per_month);
    }
    return cells;
}

void BM_ClusterBootstrapSerial(benchmark::State& state) {
    const MonthCells cells = synthetic_cells(600, 150);
    const int n_boot = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::cluster_bootstrap(cells, n_boot, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ClusterBootstrapOmp(benchmark::State& state) {
    const MonthCells cells = synthetic_cells(600, 150);
    const int n_boot = static_cast<int>(state.range(0));
    omp_set_num_threads(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(omp::cluster_bootstrap(cells, n_boot, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = static_cast<double>(state.range(1));
}

void thread_grid(benchmark::internal::Benchmark* b, std::int64_t size) {
    const int max_threads = omp_get_num_procs();
    for (int t = 1; t <= max_threads; t *= 2) b->Args({size, t});
    if ((max_threads & (max_threads - 1)) != 0) b->Args({size, max_threads});
}

}  // namespace

BENCHMARK(BM_PublishedMomentsSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PublishedMomentsOmp)->Apply([](auto* b) { thread_grid(b, 1 << 20); })->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ClusterBootstrapSerial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClusterBootstrapOmp)->Apply([](auto* b) { thread_grid(b, 10000); })->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
