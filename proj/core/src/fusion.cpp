#include "comfort/fusion.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/geometry.hpp"

namespace comfort {

namespace {

// Index of the entry nearest in time to `t` within `window`, or npos.
// Exact distance ties resolve to the earlier entry.
template <typename T, typename GetTime>
std::size_t nearest_in_time(const std::vector<T>& sorted, Instant t, std::int64_t window,
                            GetTime get_time) {
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    if (sorted.empty()) return npos;
    const auto cmp = [&](const T& item, Instant value) { return get_time(item) < value; };
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t, cmp);

    std::size_t best = npos;
    std::int64_t best_dist = window + 1;
    if (it != sorted.begin()) {
        const std::size_t i = static_cast<std::size_t>(it - sorted.begin()) - 1;
        const std::int64_t d = t - get_time(sorted[i]);
        if (d <= window) {
            best = i;
            best_dist = d;
        }
    }
    if (it != sorted.end()) {
        const std::size_t i = static_cast<std::size_t>(it - sorted.begin());
        const std::int64_t d = get_time(sorted[i]) - t;
        // Strict <: an exact tie keeps the earlier candidate.
        if (d <= window && d < best_dist) best = i;
    }
    return best;
}

struct OccupantStreams {
    std::vector<LocalizationFix> fixes;
    std::vector<WearableSample> nbt_samples;  // samples carrying near-body temperature
    std::vector<WearableSample> hr_samples;   // samples carrying heart rate
};

}  // namespace

ZoneResolution resolve_zone(const LocalizationFix& fix, const ZoneMap& zones) {
    if (fix.zone_id) {
        if (zones.contains(*fix.zone_id)) return {fix.zone_id, false};
        return {std::nullopt, false};
    }
    if (!fix.has_coordinates()) return {std::nullopt, false};

    const Point p{*fix.x_m, *fix.y_m};
    const Zone* best = nullptr;
    bool tie = false;
    for (const Zone& zone : zones.zones()) {
        if (zone.floor != *fix.floor) continue;
        if (!point_in_polygon(p, zone.polygon)) continue;
        if (!best || zone.area < best->area) {
            best = &zone;
            tie = false;
        } else if (zone.area == best->area) {
            tie = true;
        }
    }
    if (!best) return {std::nullopt, false};
    if (tie) return {std::nullopt, true};
    return {best->zone_id, false};
}

std::optional<std::string> assign_zone(const LocalizationFix& fix, const ZoneMap& zones) {
    const ZoneResolution res = resolve_zone(fix, zones);
    if (res.ambiguous) {
        throw AmbiguousZoneError("point (" + format_double(fix.x_m.value_or(0)) + ", " +
                                 format_double(fix.y_m.value_or(0)) +
                                 ") lies in overlapping equal-area zones");
    }
    return res.zone_id;
}

std::pair<std::vector<FusedRecord>, FusionStats> fuse_dataset(
    std::span<const FeedbackVote> votes, std::span<const LocalizationFix> fixes,
    std::span<const SensorReading> readings, std::span<const WearableSample> wearables,
    const ZoneMap& zones, const FusionConfig& cfg) {
    FusionStats stats;
    stats.total_votes = votes.size();

    std::unordered_map<std::string, OccupantStreams> by_occupant;
    for (const auto& f : fixes) by_occupant[f.occupant_id].fixes.push_back(f);
    for (const auto& s : wearables) {
        auto& streams = by_occupant[s.occupant_id];
        if (s.near_body_temp_c) streams.nbt_samples.push_back(s);
        if (s.heart_rate_bpm) streams.hr_samples.push_back(s);
    }
    for (auto& [_, streams] : by_occupant) {
        auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
        std::stable_sort(streams.fixes.begin(), streams.fixes.end(), by_time);
        std::stable_sort(streams.nbt_samples.begin(), streams.nbt_samples.end(), by_time);
        std::stable_sort(streams.hr_samples.begin(), streams.hr_samples.end(), by_time);
    }

    std::unordered_map<std::string, std::vector<SensorReading>> by_zone;
    for (const auto& r : readings) by_zone[r.zone_id].push_back(r);
    for (auto& [_, zone_readings] : by_zone) {
        std::stable_sort(zone_readings.begin(), zone_readings.end(),
                         [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    }

    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    const auto sample_time = [](const auto& s) { return s.timestamp; };

    std::vector<FusedRecord> out;
    out.reserve(votes.size());
    for (const FeedbackVote& vote : votes) {
        // Zone: the vote's own zone if the survey captured one, else geofence
        // the occupant's temporally nearest fix.
        std::optional<std::string> zone_id;
        if (vote.zone_id && zones.contains(*vote.zone_id)) {
            zone_id = vote.zone_id;
        } else {
            const auto it = by_occupant.find(vote.occupant_id);
            if (it != by_occupant.end()) {
                const std::size_t fi = nearest_in_time(it->second.fixes, vote.timestamp,
                                                       cfg.localization_window_s, sample_time);
                if (fi != npos) {
                    const ZoneResolution res = resolve_zone(it->second.fixes[fi], zones);
                    if (res.ambiguous) ++stats.ambiguous_zone;
                    zone_id = res.zone_id;
                }
            }
        }
        if (!zone_id) continue;  // attrition, counted via zone_resolved
        ++stats.zone_resolved;

        FusedRecord rec;
        rec.vote = vote;
        rec.zone_id = *zone_id;

        const auto zr = by_zone.find(*zone_id);
        if (zr != by_zone.end()) {
            const std::size_t ri =
                nearest_in_time(zr->second, vote.timestamp, cfg.env_window_s, sample_time);
            if (ri != npos) {
                const SensorReading& r = zr->second[ri];
                rec.env = EnvMatch{r.temperature_c, r.humidity_rh, r.noise_db,
                                   r.illuminance_lux, r.sensor_id,
                                   vote.timestamp - r.timestamp};
                ++stats.env_matched;
            }
        }

        const auto os = by_occupant.find(vote.occupant_id);
        if (os != by_occupant.end()) {
            const std::size_t ni = nearest_in_time(os->second.nbt_samples, vote.timestamp,
                                                   cfg.wearable_window_s, sample_time);
            if (ni != npos) {
                const WearableSample& s = os->second.nbt_samples[ni];
                rec.near_body_temp = ScalarMatch{*s.near_body_temp_c,
                                                 vote.timestamp - s.timestamp};
            }
            const std::size_t hi = nearest_in_time(os->second.hr_samples, vote.timestamp,
                                                   cfg.wearable_window_s, sample_time);
            if (hi != npos) {
                const WearableSample& s = os->second.hr_samples[hi];
                rec.heart_rate = ScalarMatch{*s.heart_rate_bpm, vote.timestamp - s.timestamp};
            }
            if (rec.near_body_temp || rec.heart_rate) ++stats.wearable_matched;
        }
        out.push_back(std::move(rec));
    }

    std::sort(out.begin(), out.end(), [](const FusedRecord& a, const FusedRecord& b) {
        return std::tie(a.vote.occupant_id, a.vote.timestamp, a.vote.vote_id) <
               std::tie(b.vote.occupant_id, b.vote.timestamp, b.vote.vote_id);
    });
    return {std::move(out), stats};
}

namespace {

const std::vector<std::string> kFusedHeader{
    "vote_id",   "occupant_id",      "timestamp",      "thermal",
    "light",     "noise",            "zone_id",        "temperature_c",
    "humidity_rh", "noise_db",       "illuminance_lux", "sensor_id",
    "env_age_s", "near_body_temp_c", "nbt_age_s",      "heart_rate_bpm",
    "hr_age_s"};

}  // namespace

void write_fused_csv(const std::filesystem::path& path, std::span<const FusedRecord> records) {
    CsvWriter w(path);
    w.row(kFusedHeader);
    for (const auto& rec : records) {
        const auto& v = rec.vote;
        std::vector<std::string> row{
            v.vote_id,
            v.occupant_id,
            format_rfc3339(v.timestamp),
            std::string(class_label(Dimension::Thermal, v.thermal)),
            std::string(class_label(Dimension::Light, v.light)),
            std::string(class_label(Dimension::Noise, v.noise)),
            rec.zone_id,
        };
        if (rec.env) {
            row.push_back(format_double(rec.env->temperature_c));
            row.push_back(format_double(rec.env->humidity_rh));
            row.push_back(format_double(rec.env->noise_db));
            row.push_back(format_double(rec.env->illuminance_lux));
            row.push_back(rec.env->sensor_id);
            row.push_back(std::to_string(rec.env->reading_age_s));
        } else {
            row.insert(row.end(), 6, "");
        }
        if (rec.near_body_temp) {
            row.push_back(format_double(rec.near_body_temp->value));
            row.push_back(std::to_string(rec.near_body_temp->sample_age_s));
        } else {
            row.insert(row.end(), 2, "");
        }
        if (rec.heart_rate) {
            row.push_back(format_double(rec.heart_rate->value));
            row.push_back(std::to_string(rec.heart_rate->sample_age_s));
        } else {
            row.insert(row.end(), 2, "");
        }
        w.row(row);
    }
}

std::vector<FusedRecord> read_fused_csv(const std::filesystem::path& path) {
    const CsvFile file = read_csv(path);
    if (file.header != kFusedHeader)
        throw MalformedFileError("unexpected fused.csv header in " + path.string());

    auto field = [&](const CsvRow& row, std::size_t i) -> const std::string& {
        return row.fields[i];
    };
    std::vector<FusedRecord> records;
    records.reserve(file.rows.size());
    for (const CsvRow& row : file.rows) {
        if (row.fields.size() != kFusedHeader.size())
            throw MalformedFileError("wrong field count at line " + std::to_string(row.line) +
                                     " in " + path.string());
        FusedRecord rec;
        rec.vote.vote_id = field(row, 0);
        rec.vote.occupant_id = field(row, 1);
        const auto t = parse_rfc3339(field(row, 2));
        const auto thermal = parse_class(Dimension::Thermal, field(row, 3));
        const auto light = parse_class(Dimension::Light, field(row, 4));
        const auto noise = parse_class(Dimension::Noise, field(row, 5));
        if (!t || !thermal || !light || !noise)
            throw MalformedFileError("invalid fused row at line " + std::to_string(row.line));
        rec.vote.timestamp = *t;
        rec.vote.thermal = *thermal;
        rec.vote.light = *light;
        rec.vote.noise = *noise;
        rec.zone_id = field(row, 6);
        rec.vote.zone_id = rec.zone_id;
        if (!field(row, 7).empty()) {
            EnvMatch env;
            env.temperature_c = *parse_strict_double(field(row, 7));
            env.humidity_rh = *parse_strict_double(field(row, 8));
            env.noise_db = *parse_strict_double(field(row, 9));
            env.illuminance_lux = *parse_strict_double(field(row, 10));
            env.sensor_id = field(row, 11);
            env.reading_age_s = std::stoll(field(row, 12));
            rec.env = env;
        }
        if (!field(row, 13).empty()) {
            rec.near_body_temp =
                ScalarMatch{*parse_strict_double(field(row, 13)), std::stoll(field(row, 14))};
        }
        if (!field(row, 15).empty()) {
            rec.heart_rate =
                ScalarMatch{*parse_strict_double(field(row, 15)), std::stoll(field(row, 16))};
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string fusion_stats_to_json(const FusionStats& stats) {
    nlohmann::json j{{"total_votes", stats.total_votes},
                     {"zone_resolved", stats.zone_resolved},
                     {"env_matched", stats.env_matched},
                     {"wearable_matched", stats.wearable_matched},
                     {"ambiguous_zone", stats.ambiguous_zone}};
    return j.dump(2) + "\n";
}

}  // namespace comfort
