#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "comfort/time_util.hpp"

namespace comfort {

// ---------------------------------------------------------------------------
// Preference dimensions and response classes
// ---------------------------------------------------------------------------

enum class Dimension { Thermal = 0, Light = 1, Noise = 2 };

inline constexpr std::array<std::string_view, 3> kDimensionNames{"thermal", "light", "noise"};

// Per-dimension class labels, index 0..2. Order is canonical throughout the
// pipeline: [negative-direction, no_change, positive-direction].
inline constexpr std::array<std::array<std::string_view, 3>, 3> kClassLabels{{
    {"prefer_cooler", "no_change", "prefer_warmer"},
    {"prefer_dimmer", "no_change", "prefer_brighter"},
    {"prefer_quieter", "no_change", "prefer_louder"},
}};

// The 9-way tendency class labels (3 per dimension). no_change is qualified
// per dimension; the six directional classes are unambiguous as-is.
inline constexpr std::array<std::string_view, 9> kTendencyClassLabels{
    "prefer_cooler", "no_change_thermal", "prefer_warmer",
    "prefer_dimmer", "no_change_light",   "prefer_brighter",
    "prefer_quieter", "no_change_noise",  "prefer_louder"};

std::optional<Dimension> parse_dimension(std::string_view name);
std::optional<int> parse_class(Dimension dim, std::string_view label);
std::string_view class_label(Dimension dim, int cls);
std::string_view dimension_name(Dimension dim);

// ---------------------------------------------------------------------------
// Raw data streams
// ---------------------------------------------------------------------------

struct FeedbackVote {
    std::string vote_id;
    std::string occupant_id;
    Instant timestamp;
    int thermal = 1;  // class index in kClassLabels[Thermal]
    int light = 1;
    int noise = 1;
    std::optional<std::string> zone_id;

    int class_of(Dimension dim) const {
        switch (dim) {
            case Dimension::Thermal: return thermal;
            case Dimension::Light: return light;
            default: return noise;
        }
    }
};

struct SensorReading {
    std::string sensor_id;
    std::string zone_id;
    Instant timestamp;
    double temperature_c = 0;
    double humidity_rh = 0;
    double noise_db = 0;
    double illuminance_lux = 0;
};

struct LocalizationFix {
    std::string occupant_id;
    Instant timestamp;
    std::optional<double> x_m;
    std::optional<double> y_m;
    std::optional<int> floor;
    std::optional<std::string> zone_id;

    bool has_coordinates() const { return x_m && y_m && floor; }
};

struct WearableSample {
    std::string occupant_id;
    Instant timestamp;
    std::optional<double> near_body_temp_c;
    std::optional<double> heart_rate_bpm;
};

// ---------------------------------------------------------------------------
// Building zones
// ---------------------------------------------------------------------------

struct Zone {
    std::string zone_id;
    int floor = 0;
    std::vector<std::array<double, 2>> polygon;  // open ring, >= 3 vertices
    std::string label;
    double area = 0;  // cached |shoelace| / 2
};

class ZoneMap {
public:
    ZoneMap() = default;
    explicit ZoneMap(std::vector<Zone> zones);

    const std::vector<Zone>& zones() const { return zones_; }
    const Zone* find(const std::string& zone_id) const;
    bool contains(const std::string& zone_id) const { return find(zone_id) != nullptr; }
    std::size_t size() const { return zones_.size(); }

private:
    std::vector<Zone> zones_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Fusion output
// ---------------------------------------------------------------------------

struct EnvMatch {
    double temperature_c = 0;
    double humidity_rh = 0;
    double noise_db = 0;
    double illuminance_lux = 0;
    std::string sensor_id;
    std::int64_t reading_age_s = 0;  // vote time minus reading time
};

struct ScalarMatch {
    double value = 0;
    std::int64_t sample_age_s = 0;  // vote time minus sample time
};

struct FusedRecord {
    FeedbackVote vote;
    std::string zone_id;
    std::optional<EnvMatch> env;
    std::optional<ScalarMatch> near_body_temp;
    std::optional<ScalarMatch> heart_rate;
};

struct FusionConfig {
    std::int64_t env_window_s = 900;
    std::int64_t wearable_window_s = 300;
    std::int64_t localization_window_s = 600;
};

struct FusionStats {
    std::size_t total_votes = 0;
    std::size_t zone_resolved = 0;
    std::size_t env_matched = 0;
    std::size_t wearable_matched = 0;
    std::size_t ambiguous_zone = 0;  // fixes whose polygon containment tied exactly
};

}  // namespace comfort
