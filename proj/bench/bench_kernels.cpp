#include "leadmetric/kernels.hpp"
#include "leadmetric/metrics.hpp"

#include <benchmark/benchmark.h>

using namespace leadmetric;

namespace {

struct Workload {
    Action t;
    Action s;
    std::vector<GroupElement> elements;
    std::vector<MeasurableSet> sets;
};

Workload permutation_workload(std::uint32_t n, std::uint64_t radius) {
    Action t = rotation_action(n);
    Action s = rotation_action(n, 3);
    const GeneratingFamily family = default_family(t, 8);
    return {t, s, t.model().ball_sequence(radius), family_prefix(family, 8)};
}

Workload bernoulli_workload(std::uint64_t radius) {
    Action t = BernoulliAction(GroupModel::zd(1), {ratio(1, 2), ratio(1, 2)});
    Action s = BernoulliAction(GroupModel::zd(1), {ratio(1, 3), ratio(2, 3)});
    const GeneratingFamily family = default_family(t, 4);
    return {t, s, t.model().ball_sequence(radius), family_prefix(family, 4)};
}

void BM_CorrelationSerial(benchmark::State& state) {
    const auto w = permutation_workload(static_cast<std::uint32_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(correlation_table_serial(w.t, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

void BM_CorrelationParallel(benchmark::State& state) {
    const auto w = permutation_workload(static_cast<std::uint32_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(correlation_table_parallel(w.t, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

void BM_BernoulliCorrelationSerial(benchmark::State& state) {
    const auto w = bernoulli_workload(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(correlation_table_serial(w.t, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

void BM_BernoulliCorrelationParallel(benchmark::State& state) {
    const auto w = bernoulli_workload(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(correlation_table_parallel(w.t, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

void BM_DisplacementSerial(benchmark::State& state) {
    const auto w = permutation_workload(static_cast<std::uint32_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(displacement_serial(w.t, w.s, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

void BM_DisplacementParallel(benchmark::State& state) {
    const auto w = permutation_workload(static_cast<std::uint32_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(displacement_parallel(w.t, w.s, w.elements, w.sets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.elements.size()));
}

}  // namespace

BENCHMARK(BM_CorrelationSerial)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelationParallel)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BernoulliCorrelationSerial)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BernoulliCorrelationParallel)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DisplacementSerial)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DisplacementParallel)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
