#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "comfort/errors.hpp"
#include "comfort/eval.hpp"
#include "comfort/fusion.hpp"
#include "comfort/rng.hpp"
#include "comfort/synth.hpp"
#include "helpers.hpp"

using namespace comfort;
using testutil::make_record;
using testutil::with_env;

namespace {

const Timezone kSgt = parse_timezone("Asia/Singapore");

std::vector<FusedRecord> fuse_sim(const SimResult& sim, const FusionConfig& cfg = {}) {
    return fuse_dataset(sim.votes, sim.fixes, sim.readings, sim.wearables, sim.zones, cfg)
        .first;
}

EvalOptions small_opts(int trees = 40, std::uint64_t seed = 0) {
    EvalOptions opts;
    opts.forest.n_trees = trees;
    opts.forest.master_seed = seed;
    opts.tz = kSgt;
    opts.threads = 2;
    return opts;
}

double majority_frequency(std::span<const int> labels) {
    std::array<int, 3> counts{};
    for (const int l : labels) ++counts[static_cast<std::size_t>(l)];
    return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
           static_cast<double>(labels.size());
}

}  // namespace

TEST_CASE("temporal split takes the first ceil(0.6 n) votes") {
    std::vector<FusedRecord> records;
    for (int i = 0; i < 10; ++i)
        records.push_back(make_record("ten", "t" + std::to_string(i), 1000 + i, "z"));
    for (int i = 0; i < 5; ++i)
        records.push_back(make_record("five", "f" + std::to_string(i), 1000 + i, "z"));
    for (int i = 0; i < 3; ++i)
        records.push_back(make_record("tiny", "s" + std::to_string(i), 1000 + i, "z"));

    const SplitPlan plan = temporal_split(records);
    CHECK(plan.by_occupant.at("ten").train_ids.size() == 6);
    CHECK(plan.by_occupant.at("ten").test_ids.size() == 4);
    CHECK(plan.by_occupant.at("five").train_ids.size() == 3);  // ceil(0.6*5) = 3
    CHECK(plan.by_occupant.at("five").test_ids.size() == 2);
    CHECK(plan.excluded_occupants == std::vector<std::string>{"tiny"});

    // No test timestamp precedes a train timestamp for that occupant.
    for (const auto& [occupant, split] : plan.by_occupant) {
        Instant max_train{-1};
        for (const auto& rec : records)
            if (rec.vote.occupant_id == occupant &&
                std::find(split.train_ids.begin(), split.train_ids.end(), rec.vote.vote_id) !=
                    split.train_ids.end())
                max_train = std::max(max_train, rec.vote.timestamp);
        for (const auto& rec : records)
            if (rec.vote.occupant_id == occupant &&
                std::find(split.test_ids.begin(), split.test_ids.end(), rec.vote.vote_id) !=
                    split.test_ids.end())
                CHECK(rec.vote.timestamp >= max_train);
    }
}

TEST_CASE("micro F1 equals accuracy in single-label prediction") {
    const std::vector<int> perfect{0, 1, 2, 1};
    CHECK(f1_micro(perfect, perfect, 3) == 1.0);

    const std::vector<int> y_true{0, 1, 2, 1};
    const std::vector<int> y_pred{0, 2, 2, 1};
    CHECK(f1_micro(y_true, y_pred, 3) == 0.75);

    CHECK_THROWS_AS(f1_micro(std::vector<int>{0, 1}, std::vector<int>{0}, 3),
                    LengthMismatchError);

    Rng rng(314);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        std::vector<int> t(n), p(n);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = static_cast<int>(rng.below(3));
            p[i] = static_cast<int>(rng.below(3));
            correct += t[i] == p[i];
        }
        const double accuracy = static_cast<double>(correct) / static_cast<double>(n);
        CHECK(f1_micro(t, p, 3) == accuracy);  // bitwise
    }
}

TEST_CASE("individual models learn deterministic personal rules") {
    SimConfig cfg;
    cfg.n_occupants = 5;
    cfg.n_zones = 2;
    cfg.days = 28;
    cfg.votes_per_day_min = 9;
    cfg.votes_per_day_max = 14;
    cfg.archetype_mix = {{Archetype{"a", 0, 0, 0, 0.0}, 1.0},
                         {Archetype{"b", 3, 120, 6, 0.0}, 1.0}};
    cfg.seed = 404;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);

    const auto spec = *find_feature_set("FS1");
    const EvalOptions opts = small_opts(80, 2);
    for (const Dimension dim : {Dimension::Thermal, Dimension::Light, Dimension::Noise}) {
        const EvalReport report = eval_individual(records, split, spec, dim, opts);
        for (const auto& [occupant, score] : report.per_occupant) {
            INFO("occupant ", occupant, " dim ", dimension_name(dim));
            CHECK(score.f1 >= 0.95);
        }
        // Aggregate micro F1 lies within the per-occupant range.
        double lo = 1.0, hi = 0.0;
        for (const auto& [_, score] : report.per_occupant) {
            lo = std::min(lo, score.f1);
            hi = std::max(hi, score.f1);
        }
        CHECK(report.f1 >= lo - 1e-12);
        CHECK(report.f1 <= hi + 1e-12);
    }
}

TEST_CASE("single-class training labels give a constant predictor") {
    // Occupant whose training period is all prefer_cooler but whose test
    // period drifts: F1 equals the majority class's test frequency.
    std::vector<FusedRecord> records;
    for (int i = 0; i < 6; ++i)
        records.push_back(with_env(make_record("o1", "a" + std::to_string(i), 1000 + i, "z", 0),
                                   20.0 + i));
    for (int i = 0; i < 4; ++i)
        records.push_back(with_env(make_record("o1", "b" + std::to_string(i), 2000 + i, "z",
                                               i < 2 ? 0 : 1),
                                   26.0 + i));
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS1");
    const EvalReport report = eval_individual(records, split, spec, Dimension::Thermal,
                                              small_opts(10, 1));
    CHECK(report.per_occupant.at("o1").f1 == doctest::Approx(0.5));  // 2 of 4 test rows
}

TEST_CASE("grouped with a single occupant equals the individual report") {
    SimConfig cfg;
    cfg.n_occupants = 1;
    cfg.n_zones = 2;
    cfg.days = 12;
    cfg.seed = 11;
    cfg.archetype_mix = {{Archetype{"a", 0, 0, 0, 0.05}, 1.0}};
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS1");
    const EvalOptions opts = small_opts(30, 9);
    const EvalReport grouped = eval_grouped(records, split, spec, Dimension::Thermal, opts);
    const EvalReport individual = eval_individual(records, split, spec, Dimension::Thermal, opts);
    CHECK(grouped.f1 == individual.f1);
    CHECK(grouped.confusion.counts == individual.confusion.counts);
}

TEST_CASE("a shared-archetype population favors the grouped model") {
    SimConfig cfg;
    cfg.n_occupants = 8;
    cfg.n_zones = 4;
    cfg.days = 10;
    cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, 0.08}, 1.0}};
    cfg.seed = 3030;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS1");
    const EvalOptions opts = small_opts(48, 8);
    for (const Dimension dim : {Dimension::Thermal, Dimension::Light, Dimension::Noise}) {
        const double grouped = eval_grouped(records, split, spec, dim, opts).f1;
        const double individual = eval_individual(records, split, spec, dim, opts).f1;
        INFO("dimension ", dimension_name(dim));
        CHECK(grouped >= individual - 0.02);
    }
}

TEST_CASE("disjoint archetypes: grouped may lose but the report stays well-formed") {
    SimConfig cfg;
    cfg.n_occupants = 6;
    cfg.n_zones = 3;
    cfg.days = 10;
    cfg.archetype_mix = {{Archetype{"cold", -5, 0, 0, 0.0}, 1.0},
                         {Archetype{"hot", 5, 0, 0, 0.0}, 1.0}};
    cfg.seed = 606;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    // Time-only features: opposed rules in one pool are genuinely adversarial.
    const FeatureSetSpec spec{"T", {FeatureGroup::Time}};
    const EvalOptions opts = small_opts(30, 2);
    const EvalReport grouped = eval_grouped(records, split, spec, Dimension::Thermal, opts);
    const EvalReport individual =
        eval_individual(records, split, spec, Dimension::Thermal, opts);
    for (const EvalReport* report : {&grouped, &individual}) {
        CHECK(report->f1 >= 0.0);
        CHECK(report->f1 <= 1.0);
        CHECK(report->confusion.total() == report->rows_test);
        CHECK(report->per_class.size() == 3);
        std::int64_t per_occ_rows = 0;
        for (const auto& [_, score] : report->per_occupant) per_occ_rows += score.test_rows;
        CHECK(per_occ_rows == report->rows_test);
    }
}

TEST_CASE("cold-start curves: shape, range, and exact grouped match at k = N-1") {
    SimConfig cfg;
    cfg.n_occupants = 6;
    cfg.n_zones = 3;
    cfg.days = 10;
    cfg.votes_per_day_min = 4;
    cfg.votes_per_day_max = 8;
    cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, 0.05}, 1.0}};
    cfg.seed = 2024;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS4");
    const EvalOptions opts = small_opts(24, 77);

    const auto curves =
        coldstart_curves(records, split, spec, Dimension::Thermal, opts, 3, 555);
    const EvalReport grouped = eval_grouped(records, split, spec, Dimension::Thermal, opts);

    const int n = static_cast<int>(split.occupant_count());
    REQUIRE(curves.size() == split.occupant_count());
    for (const auto& curve : curves) {
        REQUIRE(curve.points.size() == static_cast<std::size_t>(n - 1));
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].k == static_cast<int>(i) + 1);
            CHECK(curve.points[i].f1_excluded >= 0.0);
            CHECK(curve.points[i].f1_excluded <= 1.0);
            CHECK(curve.points[i].f1_included >= 0.0);
            CHECK(curve.points[i].f1_included <= 1.0);
        }
        // k = N-1 included trains on everyone: exactly the grouped model.
        const double grouped_f1 = grouped.per_occupant.at(curve.occupant_id).f1;
        CHECK(curve.points.back().f1_included == grouped_f1);
    }

    CHECK_THROWS_AS(coldstart_curves(std::vector<FusedRecord>{records[0]},
                                     temporal_split(std::vector<FusedRecord>{}), spec,
                                     Dimension::Thermal, opts, 3, 1),
                    InsufficientOccupantsError);
}

TEST_CASE("cold start from an opposite archetype is at or below the majority baseline") {
    // Two occupants with opposite thermal rules; k=1 excluded trains only on
    // the opposite one.
    SimConfig cfg;
    cfg.n_occupants = 2;
    cfg.n_zones = 2;
    cfg.days = 14;
    cfg.votes_per_day_min = 6;
    cfg.votes_per_day_max = 10;
    cfg.archetype_mix = {{Archetype{"cold", -4, 0, 0, 0.0}, 1.0},
                         {Archetype{"hot", 4, 0, 0, 0.0}, 1.0}};
    cfg.seed = 31;
    SimResult sim = simulate(cfg);
    // Force opposite archetypes regardless of the weighted draw.
    REQUIRE(sim.truth.occupant_archetype.size() == 2);
    if (sim.truth.occupant_archetype.begin()->second ==
        std::next(sim.truth.occupant_archetype.begin())->second) {
        cfg.seed = 32;  // draw again; seed chosen so the mix differs
        sim = simulate(cfg);
    }
    REQUIRE(sim.truth.occupant_archetype.begin()->second !=
            std::next(sim.truth.occupant_archetype.begin())->second);

    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS1");  // env-driven: rules disagree mid-range
    const EvalOptions opts = small_opts(40, 4);
    const auto curves = coldstart_curves(records, split, spec, Dimension::Thermal, opts, 2, 9);

    for (const auto& curve : curves) {
        // Majority baseline over the target's test labels.
        std::vector<int> test_labels;
        for (const auto& rec : records) {
            const auto& ids = split.by_occupant.at(curve.occupant_id).test_ids;
            if (rec.vote.occupant_id == curve.occupant_id &&
                std::find(ids.begin(), ids.end(), rec.vote.vote_id) != ids.end())
                test_labels.push_back(rec.vote.thermal);
        }
        REQUIRE_FALSE(test_labels.empty());
        CHECK(curve.points.front().f1_excluded <= majority_frequency(test_labels) + 1e-9);
    }
}

TEST_CASE("zone forecast flags unsupported night hours and finds planted peaks") {
    SimConfig cfg;
    cfg.n_occupants = 8;
    cfg.n_zones = 1;
    cfg.days = 14;
    cfg.votes_per_day_min = 8;
    cfg.votes_per_day_max = 14;
    cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, 0.0}, 1.0}};
    // Sinusoid peaking at 0.5 h dips to 21 C at 12.5 h: prefer_warmer only in
    // a 09:17-15:43 midday band, no_change at the 08:30 probe.
    cfg.zone_schedules = {ZoneSchedule{24.0, 3.0, 0.5, 600, 40, 36, 0, 0}};
    cfg.seed = 88;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);

    const Forecast forecast =
        zone_forecast(records, "zone-01", Dimension::Thermal, small_opts(60, 12), 30);
    REQUIRE(forecast.points.size() == 7 * 48);

    double warm_at_midday = 0, warm_at_morning = 0;
    for (const auto& point : forecast.points) {
        // Votes are confined to [08:00, 20:00): the night band has no support.
        if (point.hour_local >= 22.0 || point.hour_local < 7.0) {
            CHECK(point.support == 0);
            CHECK(point.low_confidence);
        }
        if (point.day_of_week == 2) {  // any mid-week day
            if (point.hour_local == 12.5) warm_at_midday = point.probs[2];
            if (point.hour_local == 8.5) warm_at_morning = point.probs[2];
        }
    }
    CHECK(warm_at_midday > 0.8);
    CHECK(warm_at_midday > warm_at_morning);

    CHECK_THROWS_AS(zone_forecast(records, "ghost", Dimension::Thermal, small_opts(), 30),
                    EmptyZoneError);
}

TEST_CASE("uniform all-no_change votes forecast a constant distribution") {
    std::vector<FusedRecord> records;
    for (int i = 0; i < 40; ++i)
        records.push_back(make_record("o1", "v" + std::to_string(i),
                                      1'700'000'000 + i * 3600, "zone-x", 1, 1, 1));
    const Forecast forecast =
        zone_forecast(records, "zone-x", Dimension::Thermal, small_opts(10, 3), 60);
    for (const auto& point : forecast.points) {
        CHECK(point.probs[1] == doctest::Approx(1.0));
        CHECK(point.probs[0] == doctest::Approx(0.0));
        CHECK(point.probs[2] == doctest::Approx(0.0));
    }
}

TEST_CASE("evaluation is a deterministic function of (data, config, seed)") {
    SimConfig cfg;
    cfg.n_occupants = 4;
    cfg.n_zones = 2;
    cfg.days = 8;
    cfg.seed = 6;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS6");
    const EvalOptions opts = small_opts(20, 5);
    const EvalReport a = eval_grouped(records, split, spec, Dimension::Light, opts);
    const EvalReport b = eval_grouped(records, split, spec, Dimension::Light, opts);
    CHECK(a.f1 == b.f1);
    CHECK(a.confusion.counts == b.confusion.counts);
    CHECK(eval_report_to_json(a) == eval_report_to_json(b));
}
