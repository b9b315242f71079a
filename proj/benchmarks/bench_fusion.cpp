#include <benchmark/benchmark.h>

#include "comfort/fusion.hpp"
#include "comfort/synth.hpp"

using namespace comfort;

namespace {

// Study-scale synthetic streams (about 4k votes, 24k readings).
const SimResult& study_scale() {
    static const SimResult sim = [] {
        SimConfig cfg;
        cfg.seed = 11;
        return simulate(cfg);
    }();
    return sim;
}

}  // namespace

static void BM_FuseDataset(benchmark::State& state) {
    const SimResult& sim = study_scale();
    for (auto _ : state) {
        auto result =
            fuse_dataset(sim.votes, sim.fixes, sim.readings, sim.wearables, sim.zones, {});
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sim.votes.size()));
}
BENCHMARK(BM_FuseDataset);

static void BM_AssignZone(benchmark::State& state) {
    const SimResult& sim = study_scale();
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& fix = sim.fixes[i++ % sim.fixes.size()];
        auto zone = resolve_zone(fix, sim.zones);
        benchmark::DoNotOptimize(zone);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AssignZone);

static void BM_Simulate(benchmark::State& state) {
    SimConfig cfg;
    cfg.n_occupants = static_cast<int>(state.range(0));
    cfg.days = 14;
    cfg.seed = 9;
    for (auto _ : state) {
        SimResult sim = simulate(cfg);
        benchmark::DoNotOptimize(sim);
    }
}
BENCHMARK(BM_Simulate)->Arg(10)->Arg(30);

BENCHMARK_MAIN();
