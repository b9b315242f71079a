#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comfort/types.hpp"

namespace comfort {

enum class FileFormat { Csv, Jsonl };

std::optional<FileFormat> parse_file_format(std::string_view name);

struct RejectedRow {
    int line = 0;
    std::string reason;
};

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<RejectedRow> rejects;
    std::size_t total_rows = 0;  // records.size() + rejects.size()
};

struct LoadOptions {
    // Rows stamped after this instant are rejected (dataset horizon guard).
    std::optional<Instant> horizon;
};

// Loaders parse, validate against the type invariants, and return survivors in
// canonical order. Rejected rows carry the 1-based source line and a reason.
// MalformedFileError: unreadable file or wrong header. EmptyDatasetError: no
// row survived. Duplicate vote ids reject the later occurrence.
LoadResult<FeedbackVote> load_votes(const std::filesystem::path& path, FileFormat format,
                                    const LoadOptions& opts = {});
LoadResult<SensorReading> load_sensor_readings(const std::filesystem::path& path,
                                               FileFormat format, const LoadOptions& opts = {});
LoadResult<LocalizationFix> load_localization(const std::filesystem::path& path,
                                              FileFormat format, const LoadOptions& opts = {});
LoadResult<WearableSample> load_wearable(const std::filesystem::path& path, FileFormat format,
                                         const LoadOptions& opts = {});

// GeoJSON FeatureCollection of polygons with {zone_id, floor, label}
// properties. Structural problems (duplicate ids, self-intersecting rings)
// throw MalformedFileError.
ZoneMap load_zone_map(const std::filesystem::path& path);

// Canonical serializers (CSV with the documented schemas, RFC 3339 Z
// timestamps, empty string for absent optionals).
void write_votes_csv(const std::filesystem::path& path, std::span<const FeedbackVote> votes);
void write_sensor_readings_csv(const std::filesystem::path& path,
                               std::span<const SensorReading> readings);
void write_localization_csv(const std::filesystem::path& path,
                            std::span<const LocalizationFix> fixes);
void write_wearable_csv(const std::filesystem::path& path,
                        std::span<const WearableSample> samples);
void write_zone_map_geojson(const std::filesystem::path& path, const ZoneMap& zones);

void write_rejects_csv(const std::filesystem::path& path, std::span<const RejectedRow> rejects);

// Readings whose zone_id is not in the map are split out (cross-file check;
// the per-file loader cannot see the zone map).
std::pair<std::vector<SensorReading>, std::vector<RejectedRow>> cross_validate_readings(
    std::vector<SensorReading> readings, const ZoneMap& zones);

// Canonical orderings (total and deterministic; ties broken lexicographically).
void sort_votes(std::vector<FeedbackVote>& votes);
void sort_readings(std::vector<SensorReading>& readings);
void sort_fixes(std::vector<LocalizationFix>& fixes);
void sort_wearables(std::vector<WearableSample>& samples);

}  // namespace comfort
