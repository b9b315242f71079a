#include <benchmark/benchmark.h>

#include "comfort/forest.hpp"
#include "comfort/rng.hpp"

using namespace comfort;

namespace {

// Three-class axis-aligned rule with 10% label noise, 8 features.
FeatureMatrix synthetic_matrix(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m;
    m.dimension = Dimension::Thermal;
    for (int f = 0; f < 8; ++f) m.feature_names.push_back("f" + std::to_string(f));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(8);
        for (auto& v : row) v = rng.uniform(0, 10);
        int label = row[0] > 6 ? 0 : (row[1] > 5 ? 1 : 2);
        if (rng.unit() < 0.1) label = (label + 1) % 3;
        m.rows.push_back(std::move(row));
        m.labels.push_back(label);
        m.vote_ids.push_back("v" + std::to_string(i));
        m.occupant_ids.push_back("o");
    }
    return m;
}

}  // namespace

static void BM_ForestFit(benchmark::State& state) {
    const FeatureMatrix m = synthetic_matrix(static_cast<std::size_t>(state.range(0)), 7);
    ForestConfig cfg;
    cfg.n_trees = static_cast<int>(state.range(1));
    cfg.master_seed = 1;
    for (auto _ : state) {
        RandomForestModel model = fit_forest(m, cfg, 1);
        benchmark::DoNotOptimize(model);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestFit)->Args({500, 50})->Args({2000, 50})->Args({2000, 200});

static void BM_ForestPredict(benchmark::State& state) {
    const FeatureMatrix train = synthetic_matrix(2000, 7);
    const FeatureMatrix probe = synthetic_matrix(static_cast<std::size_t>(state.range(0)), 8);
    ForestConfig cfg;
    cfg.n_trees = 200;
    cfg.master_seed = 1;
    const RandomForestModel model = fit_forest(train, cfg, 2);
    for (auto _ : state) {
        auto preds = predict(model, probe);
        benchmark::DoNotOptimize(preds);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestPredict)->Arg(1000);

static void BM_ForestSerialize(benchmark::State& state) {
    const FeatureMatrix train = synthetic_matrix(2000, 7);
    ForestConfig cfg;
    cfg.n_trees = 100;
    cfg.master_seed = 1;
    const RandomForestModel model = fit_forest(train, cfg, 2);
    for (auto _ : state) {
        const std::string text = forest_to_json(model);
        benchmark::DoNotOptimize(text);
    }
}
BENCHMARK(BM_ForestSerialize);

BENCHMARK_MAIN();
