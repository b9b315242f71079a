#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "comfort/types.hpp"

namespace comfort {

// A comfort-preference profile: biases shift the shared response thresholds,
// response_noise flips a vote to a uniformly random other class.
struct Archetype {
    std::string name = "neutral";
    double thermal_bias_c = 0;
    double light_bias_lux = 0;
    double noise_bias_db = 0;
    double response_noise = 0;  // < 0.5 so the rule stays learnable
};

struct ZoneSchedule {
    double temp_base_c = 24;
    double temp_amp_c = 5;
    double temp_phase_h = 15;  // hour of the sinusoidal peak
    double lux_day = 600;
    double lux_night = 40;
    double noise_base_db = 36;
    int bursts_per_day = 3;
    double burst_db = 26;
};

// Shared response thresholds. prefer_louder never fires with the default
// negative low threshold, reproducing the study's empty class.
struct ResponseRule {
    double thermal_hi_c = 26;   // above => prefer_cooler
    double thermal_lo_c = 22;   // below => prefer_warmer
    double lux_hi = 700;        // above => prefer_dimmer
    double lux_lo = 120;        // below => prefer_brighter
    double noise_hi_db = 52;    // above => prefer_quieter
    double noise_lo_db = -1;    // below => prefer_louder
};

struct SimConfig {
    int n_occupants = 30;
    int n_zones = 6;
    int days = 14;
    int votes_per_day_min = 5;
    int votes_per_day_max = 15;
    double vote_day_start_h = 8.0;
    double vote_day_end_h = 20.0;
    std::vector<std::pair<Archetype, double>> archetype_mix =
        {{Archetype{"neutral", 0, 0, 0, 0.05}, 1.0}};
    std::vector<ZoneSchedule> zone_schedules;  // empty: derived from seed
    ResponseRule rule;
    int sensor_cadence_s = 300;
    std::string timezone = "Asia/Singapore";
    std::uint64_t seed = 0;
};

struct GroundTruth {
    std::map<std::string, Archetype> archetypes;         // name -> parameters
    std::map<std::string, std::string> occupant_archetype;
    std::map<std::string, std::array<int, 3>> clean_labels;  // vote_id -> class per dimension
    ResponseRule rule;
    std::map<std::string, ZoneSchedule> zone_schedules;
};

struct SimResult {
    std::vector<FeedbackVote> votes;
    std::vector<SensorReading> readings;
    std::vector<LocalizationFix> fixes;
    std::vector<WearableSample> wearables;
    ZoneMap zones;
    GroundTruth truth;
};

// Deterministic generator. Vote classes follow the threshold rule applied to
// the zone reading nearest in time (the same reading fusion will recover), so
// at response_noise 0 the fused features determine every label exactly.
// Throws InvalidConfigError for out-of-range configs.
SimResult simulate(const SimConfig& cfg);

// Writes the canonical ingest files plus ground_truth.json into `dir`.
void write_dataset(const SimResult& result, const std::filesystem::path& dir);

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);

}  // namespace comfort
