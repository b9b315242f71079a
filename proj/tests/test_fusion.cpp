#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/fusion.hpp"
#include "comfort/rng.hpp"
#include "helpers.hpp"

using namespace comfort;

namespace {

ZoneMap two_floor_map() {
    std::vector<Zone> zones;
    zones.push_back({"a", 1, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, "A", 100.0});
    zones.push_back({"b", 1, {{20, 0}, {30, 0}, {30, 10}, {20, 10}}, "B", 100.0});
    zones.push_back({"up", 2, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, "Upstairs", 100.0});
    // A small zone nested inside "a": overlap resolves to the smaller area.
    zones.push_back({"nook", 1, {{1, 1}, {3, 1}, {3, 3}, {1, 3}}, "Nook", 4.0});
    return ZoneMap(std::move(zones));
}

LocalizationFix fix_at(double x, double y, int floor, std::int64_t t = 0,
                       const std::string& occupant = "o1") {
    LocalizationFix fix;
    fix.occupant_id = occupant;
    fix.timestamp = Instant{t};
    fix.x_m = x;
    fix.y_m = y;
    fix.floor = floor;
    return fix;
}

FeedbackVote vote_at(const std::string& id, const std::string& occupant, std::int64_t t) {
    FeedbackVote vote;
    vote.vote_id = id;
    vote.occupant_id = occupant;
    vote.timestamp = Instant{t};
    return vote;
}

SensorReading reading_at(const std::string& zone, std::int64_t t, double temp = 25.0) {
    SensorReading r;
    r.sensor_id = "s-" + zone;
    r.zone_id = zone;
    r.timestamp = Instant{t};
    r.temperature_c = temp;
    r.humidity_rh = 55;
    r.noise_db = 40;
    r.illuminance_lux = 300;
    return r;
}

}  // namespace

TEST_CASE("assign_zone: centroid, outside, floor match, pass-through") {
    const ZoneMap zones = two_floor_map();
    CHECK(*assign_zone(fix_at(7, 5, 1), zones) == "a");
    CHECK(*assign_zone(fix_at(25, 5, 1), zones) == "b");
    CHECK_FALSE(assign_zone(fix_at(15, 5, 1), zones).has_value());   // gap between zones
    CHECK(*assign_zone(fix_at(5, 5, 2), zones) == "up");             // floor selects the polygon

    LocalizationFix pre;
    pre.occupant_id = "o1";
    pre.zone_id = "b";
    CHECK(*assign_zone(pre, zones) == "b");
}

TEST_CASE("assign_zone: nested overlap resolves to the smaller zone") {
    const ZoneMap zones = two_floor_map();
    CHECK(*assign_zone(fix_at(2, 2, 1), zones) == "nook");
}

TEST_CASE("assign_zone: shared edge of equal-area zones is ambiguous") {
    std::vector<Zone> zones;
    zones.push_back({"left", 1, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, "L", 100.0});
    zones.push_back({"right", 1, {{10, 0}, {20, 0}, {20, 10}, {10, 10}}, "R", 100.0});
    const ZoneMap map(std::move(zones));
    CHECK_THROWS_AS(assign_zone(fix_at(10, 5, 1), map), AmbiguousZoneError);
    // The non-throwing layer reports ambiguity instead.
    CHECK(resolve_zone(fix_at(10, 5, 1), map).ambiguous);
}

TEST_CASE("fusion picks the temporally nearest reading within the window") {
    const ZoneMap zones = two_floor_map();
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes{vote_at("v1", "o1", t0)};
    std::vector<LocalizationFix> fixes{fix_at(5, 5, 1, t0 - 30)};
    std::vector<SensorReading> readings{reading_at("a", t0 - 300, 21.0),
                                        reading_at("a", t0 + 1200, 29.0)};
    const auto [records, stats] =
        fuse_dataset(votes, fixes, readings, {}, zones, FusionConfig{});
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].env.has_value());
    CHECK(records[0].env->temperature_c == 21.0);  // 300 s beats 1200 s
    CHECK(records[0].env->reading_age_s == 300);
    CHECK(records[0].zone_id == "a");
    CHECK(stats.env_matched == 1);
}

TEST_CASE("exact temporal ties resolve toward the earlier reading") {
    const ZoneMap zones = two_floor_map();
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes{vote_at("v1", "o1", t0)};
    std::vector<LocalizationFix> fixes{fix_at(5, 5, 1, t0)};
    std::vector<SensorReading> readings{reading_at("a", t0 - 120, 20.0),
                                        reading_at("a", t0 + 120, 30.0)};
    const auto [records, stats] =
        fuse_dataset(votes, fixes, readings, {}, zones, FusionConfig{});
    REQUIRE(records.size() == 1);
    CHECK(records[0].env->temperature_c == 20.0);
    CHECK(records[0].env->reading_age_s == 120);
}

TEST_CASE("votes with no usable fix are dropped and counted") {
    const ZoneMap zones = two_floor_map();
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes{vote_at("v1", "o1", t0), vote_at("v2", "o1", t0 + 5000)};
    // Only one fix, within 600 s of v1 but 4970 s away from v2.
    std::vector<LocalizationFix> fixes{fix_at(5, 5, 1, t0 - 30)};
    const auto [records, stats] = fuse_dataset(votes, fixes, {}, {}, zones, FusionConfig{});
    CHECK(records.size() == 1);
    CHECK(stats.total_votes == 2);
    CHECK(stats.zone_resolved == 1);
    CHECK(stats.env_matched == 0);
}

TEST_CASE("a vote with no environmental match keeps env absent") {
    const ZoneMap zones = two_floor_map();
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes{vote_at("v1", "o1", t0)};
    std::vector<LocalizationFix> fixes{fix_at(5, 5, 1, t0)};
    std::vector<SensorReading> readings{reading_at("a", t0 - 4000)};  // outside 900 s window
    const auto [records, stats] =
        fuse_dataset(votes, fixes, readings, {}, zones, FusionConfig{});
    REQUIRE(records.size() == 1);
    CHECK_FALSE(records[0].env.has_value());
    CHECK(stats.zone_resolved == 1);
    CHECK(stats.env_matched == 0);
}

TEST_CASE("wearable fields join per-field nearest samples") {
    const ZoneMap zones = two_floor_map();
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes{vote_at("v1", "o1", t0)};
    std::vector<LocalizationFix> fixes{fix_at(5, 5, 1, t0)};
    std::vector<WearableSample> wearables(2);
    wearables[0].occupant_id = "o1";
    wearables[0].timestamp = Instant{t0 - 100};
    wearables[0].near_body_temp_c = 31.5;
    wearables[1].occupant_id = "o1";
    wearables[1].timestamp = Instant{t0 - 20};
    wearables[1].heart_rate_bpm = 77;
    const auto [records, stats] =
        fuse_dataset(votes, fixes, {}, wearables, zones, FusionConfig{});
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].near_body_temp.has_value());
    REQUIRE(records[0].heart_rate.has_value());
    CHECK(records[0].near_body_temp->value == 31.5);
    CHECK(records[0].near_body_temp->sample_age_s == 100);
    CHECK(records[0].heart_rate->value == 77);
    CHECK(stats.wearable_matched == 1);
}

TEST_CASE("property: monotone attrition and nearest-neighbor optimality") {
    const ZoneMap zones = two_floor_map();
    Rng rng(1234);
    const std::int64_t t0 = 1'700'000'000;

    std::vector<FeedbackVote> votes;
    std::vector<LocalizationFix> fixes;
    std::vector<SensorReading> readings;
    for (int i = 0; i < 200; ++i) {
        votes.push_back(vote_at("v" + std::to_string(i), "o" + std::to_string(i % 7),
                                t0 + rng.uniform_int(0, 86400)));
    }
    for (int i = 0; i < 300; ++i) {
        fixes.push_back(fix_at(rng.uniform(0, 32), rng.uniform(0, 10), 1,
                               t0 + rng.uniform_int(0, 86400), "o" + std::to_string(i % 7)));
    }
    for (int i = 0; i < 400; ++i) {
        const char* zone = i % 2 == 0 ? "a" : "b";
        readings.push_back(reading_at(zone, t0 + rng.uniform_int(0, 86400),
                                      rng.uniform(18, 32)));
    }
    const FusionConfig cfg;
    const auto [records, stats] = fuse_dataset(votes, fixes, readings, {}, zones, cfg);

    CHECK(stats.total_votes == votes.size());
    CHECK(stats.zone_resolved <= stats.total_votes);
    CHECK(stats.env_matched <= stats.zone_resolved);
    CHECK(records.size() == stats.zone_resolved);

    // No reading of the matched zone may be strictly closer in time, and an
    // exact tie must have resolved toward the earlier reading.
    for (const auto& rec : records) {
        if (!rec.env) continue;
        const std::int64_t chosen_dist = std::llabs(rec.env->reading_age_s);
        const Instant chosen_time = rec.vote.timestamp - rec.env->reading_age_s;
        for (const auto& reading : readings) {
            if (reading.zone_id != rec.zone_id) continue;
            const std::int64_t d = std::llabs(rec.vote.timestamp - reading.timestamp);
            CHECK(d >= chosen_dist);
            if (d == chosen_dist) CHECK(reading.timestamp >= chosen_time);
        }
    }
}

TEST_CASE("fusion output is deterministic and round-trips through fused.csv") {
    const ZoneMap zones = two_floor_map();
    Rng rng(77);
    const std::int64_t t0 = 1'700'000'000;
    std::vector<FeedbackVote> votes;
    std::vector<LocalizationFix> fixes;
    std::vector<SensorReading> readings;
    std::vector<WearableSample> wearables;
    for (int i = 0; i < 80; ++i) {
        auto v = vote_at("v" + std::to_string(i), "o" + std::to_string(i % 5),
                         t0 + rng.uniform_int(0, 40000));
        v.thermal = static_cast<int>(rng.below(3));
        votes.push_back(v);
        fixes.push_back(fix_at(rng.uniform(1, 9), rng.uniform(1, 9), 1, v.timestamp.sec - 10,
                               v.occupant_id));
        readings.push_back(reading_at("a", t0 + i * 500, rng.uniform(18, 30)));
        WearableSample w;
        w.occupant_id = v.occupant_id;
        w.timestamp = v.timestamp - 40;
        w.near_body_temp_c = rng.uniform(28, 36);
        wearables.push_back(w);
    }

    testutil::TempDir dir("fused_rt");
    const auto run1 = fuse_dataset(votes, fixes, readings, wearables, zones, FusionConfig{});
    const auto run2 = fuse_dataset(votes, fixes, readings, wearables, zones, FusionConfig{});
    write_fused_csv(dir / "fused1.csv", run1.first);
    write_fused_csv(dir / "fused2.csv", run2.first);
    CHECK(read_text_file(dir / "fused1.csv") == read_text_file(dir / "fused2.csv"));

    const auto reloaded = read_fused_csv(dir / "fused1.csv");
    REQUIRE(reloaded.size() == run1.first.size());
    write_fused_csv(dir / "fused3.csv", reloaded);
    CHECK(read_text_file(dir / "fused1.csv") == read_text_file(dir / "fused3.csv"));
}
