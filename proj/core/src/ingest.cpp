#include "comfort/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/geometry.hpp"

namespace comfort {

namespace {

using nlohmann::json;

// Uniform view over a CSV row or a JSONL object: field name -> string value,
// with absent/empty normalized to nullopt.
class RowView {
public:
    RowView(const std::vector<std::string>* header, const std::vector<std::string>* fields)
        : header_(header), fields_(fields) {}
    explicit RowView(const json* obj) : obj_(obj) {}

    std::optional<std::string> get(std::string_view name) const {
        if (obj_) {
            const auto it = obj_->find(name);
            if (it == obj_->end() || it->is_null()) return std::nullopt;
            if (it->is_string()) {
                const auto& s = it->get_ref<const std::string&>();
                if (s.empty()) return std::nullopt;
                return s;
            }
            if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
            if (it->is_number_float()) return format_double(it->get<double>());
            if (it->is_boolean()) return std::string(it->get<bool>() ? "true" : "false");
            return std::nullopt;
        }
        for (std::size_t i = 0; i < header_->size(); ++i) {
            if ((*header_)[i] == name) {
                if (i >= fields_->size() || (*fields_)[i].empty()) return std::nullopt;
                return (*fields_)[i];
            }
        }
        return std::nullopt;
    }

private:
    const std::vector<std::string>* header_ = nullptr;
    const std::vector<std::string>* fields_ = nullptr;
    const json* obj_ = nullptr;
};

// Parses one row into T or an error string.
template <typename T>
using RowParser = std::function<std::optional<std::string>(const RowView&, T&)>;

template <typename T>
LoadResult<T> load_stream(const std::filesystem::path& path, FileFormat format,
                          const std::vector<std::string>& expected_header,
                          const RowParser<T>& parse_row) {
    LoadResult<T> result;

    auto consume = [&](int line, const RowView& row) {
        T value{};
        if (auto err = parse_row(row, value)) {
            result.rejects.push_back(RejectedRow{line, *err});
        } else {
            result.records.push_back(std::move(value));
        }
        ++result.total_rows;
    };

    if (format == FileFormat::Csv) {
        const CsvFile file = read_csv(path);
        if (file.header != expected_header) {
            std::string want;
            for (std::size_t i = 0; i < expected_header.size(); ++i) {
                if (i) want += ',';
                want += expected_header[i];
            }
            throw MalformedFileError("wrong header in " + path.string() + " (expected: " + want +
                                     ")");
        }
        for (const CsvRow& row : file.rows) {
            if (row.fields.size() != expected_header.size()) {
                result.rejects.push_back(RejectedRow{row.line, "wrong field count"});
                ++result.total_rows;
                continue;
            }
            consume(row.line, RowView(&file.header, &row.fields));
        }
    } else {
        const auto lines = read_lines(path);
        int line_no = 0;
        for (const std::string& line : lines) {
            ++line_no;
            if (line.empty()) continue;
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded() || !obj.is_object()) {
                result.rejects.push_back(RejectedRow{line_no, "invalid json object"});
                ++result.total_rows;
                continue;
            }
            consume(line_no, RowView(&obj));
        }
    }

    if (result.records.empty()) {
        throw EmptyDatasetError("no valid rows in " + path.string());
    }
    return result;
}

std::optional<std::string> parse_instant_field(const RowView& row, std::string_view name,
                                               const LoadOptions& opts, Instant& out) {
    const auto text = row.get(name);
    if (!text) return "missing " + std::string(name);
    const auto t = parse_rfc3339(*text);
    if (!t) return "invalid timestamp";
    if (opts.horizon && *t > *opts.horizon) return "timestamp after dataset horizon";
    out = *t;
    return std::nullopt;
}

std::optional<double> parse_double_field(const RowView& row, std::string_view name) {
    const auto text = row.get(name);
    if (!text) return std::nullopt;
    return parse_strict_double(*text);
}

}  // namespace

std::optional<FileFormat> parse_file_format(std::string_view name) {
    if (name == "csv") return FileFormat::Csv;
    if (name == "jsonl") return FileFormat::Jsonl;
    return std::nullopt;
}

std::optional<Dimension> parse_dimension(std::string_view name) {
    for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
        if (kDimensionNames[i] == name) return static_cast<Dimension>(i);
    }
    return std::nullopt;
}

std::optional<int> parse_class(Dimension dim, std::string_view label) {
    const auto& labels = kClassLabels[static_cast<std::size_t>(dim)];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::string_view class_label(Dimension dim, int cls) {
    return kClassLabels[static_cast<std::size_t>(dim)][static_cast<std::size_t>(cls)];
}

std::string_view dimension_name(Dimension dim) {
    return kDimensionNames[static_cast<std::size_t>(dim)];
}

ZoneMap::ZoneMap(std::vector<Zone> zones) : zones_(std::move(zones)) {
    for (std::size_t i = 0; i < zones_.size(); ++i) index_[zones_[i].zone_id] = i;
}

const Zone* ZoneMap::find(const std::string& zone_id) const {
    const auto it = index_.find(zone_id);
    return it == index_.end() ? nullptr : &zones_[it->second];
}

void sort_votes(std::vector<FeedbackVote>& votes) {
    std::sort(votes.begin(), votes.end(), [](const FeedbackVote& a, const FeedbackVote& b) {
        return std::tie(a.occupant_id, a.timestamp, a.vote_id) <
               std::tie(b.occupant_id, b.timestamp, b.vote_id);
    });
}

void sort_readings(std::vector<SensorReading>& readings) {
    std::sort(readings.begin(), readings.end(), [](const SensorReading& a,
                                                   const SensorReading& b) {
        return std::tie(a.zone_id, a.timestamp, a.sensor_id) <
               std::tie(b.zone_id, b.timestamp, b.sensor_id);
    });
}

void sort_fixes(std::vector<LocalizationFix>& fixes) {
    std::sort(fixes.begin(), fixes.end(), [](const LocalizationFix& a, const LocalizationFix& b) {
        return std::tie(a.occupant_id, a.timestamp, a.zone_id, a.x_m, a.y_m) <
               std::tie(b.occupant_id, b.timestamp, b.zone_id, b.x_m, b.y_m);
    });
}

void sort_wearables(std::vector<WearableSample>& samples) {
    std::sort(samples.begin(), samples.end(),
              [](const WearableSample& a, const WearableSample& b) {
                  return std::tie(a.occupant_id, a.timestamp, a.near_body_temp_c,
                                  a.heart_rate_bpm) < std::tie(b.occupant_id, b.timestamp,
                                                               b.near_body_temp_c,
                                                               b.heart_rate_bpm);
              });
}

LoadResult<FeedbackVote> load_votes(const std::filesystem::path& path, FileFormat format,
                                    const LoadOptions& opts) {
    static const std::vector<std::string> kHeader{"vote_id",  "occupant_id", "timestamp",
                                                  "thermal",  "light",       "noise",
                                                  "zone_id"};
    std::unordered_set<std::string> seen_ids;
    auto result = load_stream<FeedbackVote>(
        path, format, kHeader,
        [&](const RowView& row, FeedbackVote& vote) -> std::optional<std::string> {
            const auto vote_id = row.get("vote_id");
            if (!vote_id) return "missing vote_id";
            const auto occupant = row.get("occupant_id");
            if (!occupant) return "missing occupant_id";
            if (auto err = parse_instant_field(row, "timestamp", opts, vote.timestamp))
                return err;
            const std::array<std::pair<Dimension, std::string_view>, 3> dims{{
                {Dimension::Thermal, "thermal"},
                {Dimension::Light, "light"},
                {Dimension::Noise, "noise"},
            }};
            for (const auto& [dim, col] : dims) {
                const auto text = row.get(col);
                if (!text) return "missing " + std::string(col) + " preference";
                const auto cls = parse_class(dim, *text);
                if (!cls) return "invalid class for dimension";
                if (dim == Dimension::Thermal) vote.thermal = *cls;
                if (dim == Dimension::Light) vote.light = *cls;
                if (dim == Dimension::Noise) vote.noise = *cls;
            }
            // Duplicate ids reject the later occurrence (file order), never the load.
            if (!seen_ids.insert(*vote_id).second)
                return "duplicate vote_id: " + *vote_id;
            vote.vote_id = *vote_id;
            vote.occupant_id = *occupant;
            vote.zone_id = row.get("zone_id");
            return std::nullopt;
        });
    sort_votes(result.records);
    return result;
}

LoadResult<SensorReading> load_sensor_readings(const std::filesystem::path& path,
                                               FileFormat format, const LoadOptions& opts) {
    static const std::vector<std::string> kHeader{
        "sensor_id", "zone_id", "timestamp", "temperature_c", "humidity_rh", "noise_db",
        "illuminance_lux"};
    std::unordered_map<std::string, std::string> sensor_zone;
    auto result = load_stream<SensorReading>(
        path, format, kHeader,
        [&](const RowView& row, SensorReading& r) -> std::optional<std::string> {
            const auto sensor = row.get("sensor_id");
            if (!sensor) return "missing sensor_id";
            const auto zone = row.get("zone_id");
            if (!zone) return "missing zone_id";
            if (auto err = parse_instant_field(row, "timestamp", opts, r.timestamp)) return err;

            struct Field {
                const char* name;
                double lo, hi;
                double SensorReading::* member;
            };
            static constexpr Field kFields[] = {
                {"temperature_c", -10.0, 60.0, &SensorReading::temperature_c},
                {"humidity_rh", 0.0, 100.0, &SensorReading::humidity_rh},
                {"noise_db", 0.0, 140.0, &SensorReading::noise_db},
                {"illuminance_lux", 0.0, 1e12, &SensorReading::illuminance_lux},
            };
            for (const Field& f : kFields) {
                const auto v = parse_double_field(row, f.name);
                if (!v) return "missing or invalid " + std::string(f.name);
                if (*v < f.lo || *v > f.hi) return "out of range: " + std::string(f.name);
                r.*(f.member) = *v;
            }
            const auto [it, inserted] = sensor_zone.emplace(*sensor, *zone);
            if (!inserted && it->second != *zone) return "sensor mapped to multiple zones";
            r.sensor_id = *sensor;
            r.zone_id = *zone;
            return std::nullopt;
        });
    sort_readings(result.records);
    return result;
}

LoadResult<LocalizationFix> load_localization(const std::filesystem::path& path,
                                              FileFormat format, const LoadOptions& opts) {
    static const std::vector<std::string> kHeader{"occupant_id", "timestamp", "x_m",
                                                  "y_m",         "floor",     "zone_id"};
    auto result = load_stream<LocalizationFix>(
        path, format, kHeader,
        [&](const RowView& row, LocalizationFix& fix) -> std::optional<std::string> {
            const auto occupant = row.get("occupant_id");
            if (!occupant) return "missing occupant_id";
            if (auto err = parse_instant_field(row, "timestamp", opts, fix.timestamp))
                return err;
            fix.occupant_id = *occupant;
            fix.zone_id = row.get("zone_id");

            const auto x = parse_double_field(row, "x_m");
            const auto y = parse_double_field(row, "y_m");
            const auto floor_text = row.get("floor");
            std::optional<int> floor;
            if (floor_text) {
                int value = 0;
                const auto res = std::from_chars(floor_text->data(),
                                                 floor_text->data() + floor_text->size(), value);
                if (res.ec != std::errc{} || res.ptr != floor_text->data() + floor_text->size())
                    return "invalid floor";
                floor = value;
            }
            const int coord_fields = int(x.has_value()) + int(y.has_value()) +
                                     int(floor.has_value());
            if (coord_fields != 0 && coord_fields != 3) return "incomplete coordinates";
            if (coord_fields == 3) {
                fix.x_m = x;
                fix.y_m = y;
                fix.floor = floor;
            }
            if (!fix.has_coordinates() && !fix.zone_id)
                return "neither coordinates nor zone_id";
            return std::nullopt;
        });
    sort_fixes(result.records);
    return result;
}

LoadResult<WearableSample> load_wearable(const std::filesystem::path& path, FileFormat format,
                                         const LoadOptions& opts) {
    static const std::vector<std::string> kHeader{"occupant_id", "timestamp",
                                                  "near_body_temp_c", "heart_rate_bpm"};
    auto result = load_stream<WearableSample>(
        path, format, kHeader,
        [&](const RowView& row, WearableSample& s) -> std::optional<std::string> {
            const auto occupant = row.get("occupant_id");
            if (!occupant) return "missing occupant_id";
            if (auto err = parse_instant_field(row, "timestamp", opts, s.timestamp)) return err;
            s.occupant_id = *occupant;

            const auto nbt_text = row.get("near_body_temp_c");
            if (nbt_text) {
                const auto v = parse_strict_double(*nbt_text);
                if (!v) return "invalid near_body_temp_c";
                if (*v < 10.0 || *v > 45.0) return "out of range: near_body_temp_c";
                s.near_body_temp_c = v;
            }
            const auto hr_text = row.get("heart_rate_bpm");
            if (hr_text) {
                const auto v = parse_strict_double(*hr_text);
                if (!v) return "invalid heart_rate_bpm";
                if (*v < 25.0 || *v > 230.0) return "out of range: heart_rate_bpm";
                s.heart_rate_bpm = v;
            }
            if (!s.near_body_temp_c && !s.heart_rate_bpm) return "no wearable fields present";
            return std::nullopt;
        });
    sort_wearables(result.records);
    return result;
}

ZoneMap load_zone_map(const std::filesystem::path& path) {
    json doc = json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array()) {
        throw MalformedFileError("not a GeoJSON FeatureCollection: " + path.string());
    }

    std::vector<Zone> zones;
    std::set<std::string> ids;
    for (const auto& feature : doc["features"]) {
        if (!feature.is_object() || feature.value("type", "") != "Feature")
            throw MalformedFileError("invalid feature in " + path.string());
        const auto& props = feature.at("properties");
        Zone zone;
        zone.zone_id = props.at("zone_id").get<std::string>();
        zone.floor = props.at("floor").get<int>();
        zone.label = props.value("label", zone.zone_id);
        if (!ids.insert(zone.zone_id).second)
            throw MalformedFileError("duplicate zone_id: " + zone.zone_id);

        const auto& geom = feature.at("geometry");
        if (geom.value("type", "") != "Polygon")
            throw MalformedFileError("zone geometry must be Polygon: " + zone.zone_id);
        const auto& rings = geom.at("coordinates");
        if (!rings.is_array() || rings.empty())
            throw MalformedFileError("empty polygon for zone: " + zone.zone_id);
        for (const auto& pt : rings[0]) {
            zone.polygon.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        }
        // GeoJSON rings are closed; store the open ring.
        if (zone.polygon.size() >= 2 && zone.polygon.front() == zone.polygon.back())
            zone.polygon.pop_back();
        if (zone.polygon.size() < 3)
            throw MalformedFileError("polygon needs >= 3 vertices: " + zone.zone_id);
        if (!polygon_is_simple(zone.polygon))
            throw MalformedFileError("self-intersecting polygon: " + zone.zone_id);
        zone.area = polygon_area(zone.polygon);
        zones.push_back(std::move(zone));
    }
    if (zones.empty()) throw EmptyDatasetError("no zones in " + path.string());
    return ZoneMap(std::move(zones));
}

void write_votes_csv(const std::filesystem::path& path, std::span<const FeedbackVote> votes) {
    CsvWriter w(path);
    w.row({"vote_id", "occupant_id", "timestamp", "thermal", "light", "noise", "zone_id"});
    for (const auto& v : votes) {
        w.row({v.vote_id, v.occupant_id, format_rfc3339(v.timestamp),
               std::string(class_label(Dimension::Thermal, v.thermal)),
               std::string(class_label(Dimension::Light, v.light)),
               std::string(class_label(Dimension::Noise, v.noise)),
               v.zone_id.value_or("")});
    }
}

void write_sensor_readings_csv(const std::filesystem::path& path,
                               std::span<const SensorReading> readings) {
    CsvWriter w(path);
    w.row({"sensor_id", "zone_id", "timestamp", "temperature_c", "humidity_rh", "noise_db",
           "illuminance_lux"});
    for (const auto& r : readings) {
        w.row({r.sensor_id, r.zone_id, format_rfc3339(r.timestamp),
               format_double(r.temperature_c), format_double(r.humidity_rh),
               format_double(r.noise_db), format_double(r.illuminance_lux)});
    }
}

void write_localization_csv(const std::filesystem::path& path,
                            std::span<const LocalizationFix> fixes) {
    CsvWriter w(path);
    w.row({"occupant_id", "timestamp", "x_m", "y_m", "floor", "zone_id"});
    for (const auto& f : fixes) {
        w.row({f.occupant_id, format_rfc3339(f.timestamp),
               f.x_m ? format_double(*f.x_m) : "", f.y_m ? format_double(*f.y_m) : "",
               f.floor ? std::to_string(*f.floor) : "", f.zone_id.value_or("")});
    }
}

void write_wearable_csv(const std::filesystem::path& path,
                        std::span<const WearableSample> samples) {
    CsvWriter w(path);
    w.row({"occupant_id", "timestamp", "near_body_temp_c", "heart_rate_bpm"});
    for (const auto& s : samples) {
        w.row({s.occupant_id, format_rfc3339(s.timestamp),
               s.near_body_temp_c ? format_double(*s.near_body_temp_c) : "",
               s.heart_rate_bpm ? format_double(*s.heart_rate_bpm) : ""});
    }
}

void write_zone_map_geojson(const std::filesystem::path& path, const ZoneMap& zones) {
    json features = json::array();
    for (const Zone& z : zones.zones()) {
        json ring = json::array();
        for (const auto& pt : z.polygon) ring.push_back({pt[0], pt[1]});
        ring.push_back({z.polygon.front()[0], z.polygon.front()[1]});
        features.push_back({{"type", "Feature"},
                            {"properties",
                             {{"zone_id", z.zone_id}, {"floor", z.floor}, {"label", z.label}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
    json doc{{"type", "FeatureCollection"}, {"features", features}};
    write_text_file(path, doc.dump(2) + "\n");
}

void write_rejects_csv(const std::filesystem::path& path, std::span<const RejectedRow> rejects) {
    CsvWriter w(path);
    w.row({"line", "reason"});
    for (const auto& r : rejects) w.row({std::to_string(r.line), r.reason});
}

std::pair<std::vector<SensorReading>, std::vector<RejectedRow>> cross_validate_readings(
    std::vector<SensorReading> readings, const ZoneMap& zones) {
    std::vector<SensorReading> kept;
    std::vector<RejectedRow> rejects;
    kept.reserve(readings.size());
    for (auto& r : readings) {
        if (zones.contains(r.zone_id)) {
            kept.push_back(std::move(r));
        } else {
            rejects.push_back(RejectedRow{0, "unknown zone_id: " + r.zone_id + " (sensor " +
                                                 r.sensor_id + ")"});
        }
    }
    return {std::move(kept), std::move(rejects)};
}

}  // namespace comfort
