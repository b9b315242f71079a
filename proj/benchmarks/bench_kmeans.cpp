#include <benchmark/benchmark.h>

#include "comfort/rng.hpp"
#include "comfort/tendency.hpp"

using namespace comfort;

namespace {

std::vector<TendencyVector> random_vectors(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TendencyVector> vectors(n);
    for (std::size_t i = 0; i < n; ++i) {
        vectors[i].subject_id = "s" + std::to_string(i);
        vectors[i].vote_count = 50;
        for (std::size_t d = 0; d < 3; ++d) {
            // A random point on each dimension's 3-class simplex.
            double a = rng.unit(), b = rng.unit();
            if (a > b) std::swap(a, b);
            vectors[i].ratios[d * 3] = a;
            vectors[i].ratios[d * 3 + 1] = b - a;
            vectors[i].ratios[d * 3 + 2] = 1.0 - b;
            for (std::size_t c = 0; c < 3; ++c)
                vectors[i].counts[d * 3 + c] =
                    static_cast<std::int64_t>(vectors[i].ratios[d * 3 + c] * 50) + 1;
        }
    }
    return vectors;
}

}  // namespace

static void BM_KMeansFit(benchmark::State& state) {
    const auto vectors = random_vectors(static_cast<std::size_t>(state.range(0)), 3);
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        ClusterModel model = kmeans_fit(vectors, k, 42);
        benchmark::DoNotOptimize(model);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KMeansFit)->Args({30, 9})->Args({200, 9})->Args({1000, 9});

static void BM_VoteRatios(benchmark::State& state) {
    Rng rng(5);
    std::vector<FusedRecord> records(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].vote.vote_id = "v" + std::to_string(i);
        records[i].vote.occupant_id = "o" + std::to_string(i % 30);
        records[i].vote.timestamp = Instant{static_cast<std::int64_t>(i)};
        records[i].vote.thermal = static_cast<int>(rng.below(3));
        records[i].vote.light = static_cast<int>(rng.below(3));
        records[i].vote.noise = static_cast<int>(rng.below(3));
        records[i].zone_id = "z" + std::to_string(i % 6);
    }
    for (auto _ : state) {
        auto vectors = vote_ratios(records, SubjectKind::Occupant);
        benchmark::DoNotOptimize(vectors);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VoteRatios)->Arg(4000);

BENCHMARK_MAIN();
