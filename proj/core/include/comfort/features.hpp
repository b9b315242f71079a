#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "comfort/tendency.hpp"
#include "comfort/types.hpp"

namespace comfort {

enum class FeatureGroup { Time, Env, NearBody, HeartRate, Room, History };

std::optional<FeatureGroup> parse_feature_group(std::string_view name);
std::string_view feature_group_name(FeatureGroup g);

// A named combination of feature groups. Time is present in every set.
struct FeatureSetSpec {
    std::string name;
    std::set<FeatureGroup> include;

    bool has(FeatureGroup g) const { return include.count(g) > 0; }
};

// FS1 {Time,Env} .. FS6 {all}; FS1 and FS4 anchor the sensor-only and
// sensor-free comparisons.
std::vector<FeatureSetSpec> default_feature_sets();
std::optional<FeatureSetSpec> find_feature_set(std::string_view name);

struct TimeEncoding {
    double hour_sin = 0, hour_cos = 1, dow_sin = 0, dow_cos = 1;
};

// Hour of day h -> (sin 2πh/24, cos 2πh/24); fractional day-of-week
// d = weekday + h/24 -> (sin 2πd/7, cos 2πd/7), Monday = 0. Fractional d
// keeps the encoding continuous across midnight.
TimeEncoding encode_time_cyclical(Instant t, const Timezone& tz);

// The six directional response ratios (no_change excluded by construction),
// order: cooler, warmer, dimmer, brighter, quieter, louder.
inline constexpr std::array<std::string_view, 6> kDirectionalNames{
    "cooler", "warmer", "dimmer", "brighter", "quieter", "louder"};

struct DirectionalRatios {
    std::array<double, 6> ratios{};
    bool known = false;  // false => cold start, ratios all zero
};

// Occupant-history and room profiles computed from training records only, so
// test-period labels can never leak into features.
class ProfileEncoder {
public:
    explicit ProfileEncoder(std::span<const FusedRecord> training_records);

    DirectionalRatios history(const std::string& occupant_id) const;
    DirectionalRatios room(const std::string& zone_id) const;

private:
    std::map<std::string, DirectionalRatios> occupants_;
    std::map<std::string, DirectionalRatios> rooms_;
};

struct ExclusionStats {
    std::size_t input_rows = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::map<std::string, std::size_t> dropped_by_missing;  // feature group -> rows
};

struct FeatureMatrix {
    std::string spec_name;
    Dimension dimension = Dimension::Thermal;
    std::vector<std::string> feature_names;
    std::vector<std::string> vote_ids;
    std::vector<std::string> occupant_ids;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;  // class index within `dimension`

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

struct BuildOptions {
    // Encode the Room group as a single cluster label instead of ratios
    // (requires room_clusters fitted on training data).
    bool room_as_cluster_label = false;
    const ClusterModel* room_clusters = nullptr;
};

// One row per record that has every group the spec requires; rows lacking a
// required Env/NearBody/HeartRate value are excluded (never imputed) and
// counted. Room/History encodings come from `training_records`.
// Throws EmptyMatrixError when nothing survives.
std::pair<FeatureMatrix, ExclusionStats> build_matrix(
    std::span<const FusedRecord> records, const FeatureSetSpec& spec, Dimension dimension,
    std::span<const FusedRecord> training_records, const Timezone& tz,
    const BuildOptions& opts = {});

// As above but reusing a prebuilt encoder (the cold-start loop builds many
// matrices against the same training profile).
std::pair<FeatureMatrix, ExclusionStats> build_matrix_with_encoder(
    std::span<const FusedRecord> records, const FeatureSetSpec& spec, Dimension dimension,
    const ProfileEncoder& encoder, const Timezone& tz, const BuildOptions& opts = {});

void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& matrix,
                              const std::map<std::string, std::string>& vote_split);
std::string feature_sets_to_json(std::span<const FeatureSetSpec> specs);

}  // namespace comfort
