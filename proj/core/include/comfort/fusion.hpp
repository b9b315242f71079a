#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "comfort/types.hpp"

namespace comfort {

// Geofences a fix: pre-resolved zone ids pass through; coordinate fixes are
// matched to the containing polygon on the same floor (boundary counts as
// inside). Overlaps resolve to the smallest-area zone; throws
// AmbiguousZoneError on an exact area tie. Returns nullopt when no polygon
// contains the point.
std::optional<std::string> assign_zone(const LocalizationFix& fix, const ZoneMap& zones);

// Non-throwing variant used by fuse_dataset, where ambiguity is attrition.
struct ZoneResolution {
    std::optional<std::string> zone_id;
    bool ambiguous = false;
};
ZoneResolution resolve_zone(const LocalizationFix& fix, const ZoneMap& zones);

// Joins each vote with its zone (nearest fix within localization_window, or
// the vote's own zone_id when present), then the zone's temporally nearest
// reading within env_window and the occupant's nearest wearable samples
// within wearable_window. Votes without a zone are dropped and counted; a
// missing env/wearable match leaves the field absent. All temporal ties
// resolve toward the earlier sample. Output is sorted like the vote stream.
std::pair<std::vector<FusedRecord>, FusionStats> fuse_dataset(
    std::span<const FeedbackVote> votes, std::span<const LocalizationFix> fixes,
    std::span<const SensorReading> readings, std::span<const WearableSample> wearables,
    const ZoneMap& zones, const FusionConfig& cfg);

void write_fused_csv(const std::filesystem::path& path, std::span<const FusedRecord> records);
std::vector<FusedRecord> read_fused_csv(const std::filesystem::path& path);

std::string fusion_stats_to_json(const FusionStats& stats);

}  // namespace comfort
