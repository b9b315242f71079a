#include "comfort/features.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"

namespace comfort {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

void count_directional(const FusedRecord& rec, std::array<std::int64_t, 6>& counts) {
    if (rec.vote.thermal == 0) ++counts[0];  // prefer_cooler
    if (rec.vote.thermal == 2) ++counts[1];  // prefer_warmer
    if (rec.vote.light == 0) ++counts[2];    // prefer_dimmer
    if (rec.vote.light == 2) ++counts[3];    // prefer_brighter
    if (rec.vote.noise == 0) ++counts[4];    // prefer_quieter
    if (rec.vote.noise == 2) ++counts[5];    // prefer_louder
}

}  // namespace

std::optional<FeatureGroup> parse_feature_group(std::string_view name) {
    if (name == "Time" || name == "time") return FeatureGroup::Time;
    if (name == "Env" || name == "env") return FeatureGroup::Env;
    if (name == "NearBody" || name == "near_body") return FeatureGroup::NearBody;
    if (name == "HeartRate" || name == "heart_rate") return FeatureGroup::HeartRate;
    if (name == "Room" || name == "room") return FeatureGroup::Room;
    if (name == "History" || name == "history") return FeatureGroup::History;
    return std::nullopt;
}

std::string_view feature_group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::Time: return "Time";
        case FeatureGroup::Env: return "Env";
        case FeatureGroup::NearBody: return "NearBody";
        case FeatureGroup::HeartRate: return "HeartRate";
        case FeatureGroup::Room: return "Room";
        default: return "History";
    }
}

std::vector<FeatureSetSpec> default_feature_sets() {
    using G = FeatureGroup;
    return {
        {"FS1", {G::Time, G::Env}},
        {"FS2", {G::Time, G::Env, G::NearBody, G::HeartRate}},
        {"FS3", {G::Time, G::NearBody, G::HeartRate}},
        {"FS4", {G::Time, G::NearBody, G::HeartRate, G::Room, G::History}},
        {"FS5", {G::Time, G::Env, G::Room, G::History}},
        {"FS6", {G::Time, G::Env, G::NearBody, G::HeartRate, G::Room, G::History}},
    };
}

std::optional<FeatureSetSpec> find_feature_set(std::string_view name) {
    for (auto& spec : default_feature_sets()) {
        if (spec.name == name) return spec;
    }
    return std::nullopt;
}

TimeEncoding encode_time_cyclical(Instant t, const Timezone& tz) {
    const double hour = static_cast<double>(local_seconds_of_day(t, tz)) / 3600.0;
    const double dow = static_cast<double>(weekday_monday0(t, tz)) + hour / 24.0;
    TimeEncoding enc;
    enc.hour_sin = std::sin(kTau * hour / 24.0);
    enc.hour_cos = std::cos(kTau * hour / 24.0);
    enc.dow_sin = std::sin(kTau * dow / 7.0);
    enc.dow_cos = std::cos(kTau * dow / 7.0);
    return enc;
}

ProfileEncoder::ProfileEncoder(std::span<const FusedRecord> training_records) {
    std::map<std::string, std::pair<std::array<std::int64_t, 6>, std::int64_t>> occ, room;
    for (const FusedRecord& rec : training_records) {
        auto& o = occ[rec.vote.occupant_id];
        count_directional(rec, o.first);
        ++o.second;
        auto& r = room[rec.zone_id];
        count_directional(rec, r.first);
        ++r.second;
    }
    const auto to_ratios = [](const std::pair<std::array<std::int64_t, 6>, std::int64_t>& c) {
        DirectionalRatios dr;
        dr.known = true;
        for (std::size_t i = 0; i < 6; ++i)
            dr.ratios[i] = static_cast<double>(c.first[i]) / static_cast<double>(c.second);
        return dr;
    };
    for (const auto& [id, c] : occ) occupants_[id] = to_ratios(c);
    for (const auto& [id, c] : room) rooms_[id] = to_ratios(c);
}

DirectionalRatios ProfileEncoder::history(const std::string& occupant_id) const {
    const auto it = occupants_.find(occupant_id);
    return it == occupants_.end() ? DirectionalRatios{} : it->second;
}

DirectionalRatios ProfileEncoder::room(const std::string& zone_id) const {
    const auto it = rooms_.find(zone_id);
    return it == rooms_.end() ? DirectionalRatios{} : it->second;
}

std::pair<FeatureMatrix, ExclusionStats> build_matrix(
    std::span<const FusedRecord> records, const FeatureSetSpec& spec, Dimension dimension,
    std::span<const FusedRecord> training_records, const Timezone& tz,
    const BuildOptions& opts) {
    const ProfileEncoder encoder(training_records);
    return build_matrix_with_encoder(records, spec, dimension, encoder, tz, opts);
}

std::pair<FeatureMatrix, ExclusionStats> build_matrix_with_encoder(
    std::span<const FusedRecord> records, const FeatureSetSpec& spec, Dimension dimension,
    const ProfileEncoder& encoder, const Timezone& tz, const BuildOptions& opts) {
    using G = FeatureGroup;

    FeatureMatrix matrix;
    matrix.spec_name = spec.name;
    matrix.dimension = dimension;

    matrix.feature_names = {"hour_sin", "hour_cos", "dow_sin", "dow_cos"};
    if (spec.has(G::Env)) {
        matrix.feature_names.insert(matrix.feature_names.end(),
                                    {"temperature", "humidity", "noise_level", "illuminance"});
    }
    if (spec.has(G::NearBody)) matrix.feature_names.push_back("near_body_temp");
    if (spec.has(G::HeartRate)) matrix.feature_names.push_back("heart_rate");
    if (spec.has(G::Room)) {
        if (opts.room_as_cluster_label) {
            if (!opts.room_clusters)
                throw ConfigError("room_as_cluster_label requires fitted room clusters");
            matrix.feature_names.push_back("room_cluster");
        } else {
            for (const auto name : kDirectionalNames)
                matrix.feature_names.push_back("room_ratio_" + std::string(name));
        }
        matrix.feature_names.push_back("room_known");
    }
    if (spec.has(G::History)) {
        for (const auto name : kDirectionalNames)
            matrix.feature_names.push_back("history_ratio_" + std::string(name));
        matrix.feature_names.push_back("history_known");
    }

    ExclusionStats stats;
    stats.input_rows = records.size();
    for (const FusedRecord& rec : records) {
        bool missing = false;
        if (spec.has(G::Env) && !rec.env) {
            ++stats.dropped_by_missing["Env"];
            missing = true;
        }
        if (spec.has(G::NearBody) && !rec.near_body_temp) {
            ++stats.dropped_by_missing["NearBody"];
            missing = true;
        }
        if (spec.has(G::HeartRate) && !rec.heart_rate) {
            ++stats.dropped_by_missing["HeartRate"];
            missing = true;
        }
        if (missing) {
            ++stats.rows_dropped;
            continue;
        }

        std::vector<double> row;
        row.reserve(matrix.feature_names.size());
        const TimeEncoding te = encode_time_cyclical(rec.vote.timestamp, tz);
        row.insert(row.end(), {te.hour_sin, te.hour_cos, te.dow_sin, te.dow_cos});
        if (spec.has(G::Env)) {
            row.insert(row.end(), {rec.env->temperature_c, rec.env->humidity_rh,
                                   rec.env->noise_db, rec.env->illuminance_lux});
        }
        if (spec.has(G::NearBody)) row.push_back(rec.near_body_temp->value);
        if (spec.has(G::HeartRate)) row.push_back(rec.heart_rate->value);
        if (spec.has(G::Room)) {
            if (opts.room_as_cluster_label) {
                const auto it = opts.room_clusters->assignments.find(rec.zone_id);
                const bool known = it != opts.room_clusters->assignments.end();
                row.push_back(known ? static_cast<double>(it->second) : -1.0);
                row.push_back(known ? 1.0 : 0.0);
            } else {
                const DirectionalRatios dr = encoder.room(rec.zone_id);
                row.insert(row.end(), dr.ratios.begin(), dr.ratios.end());
                row.push_back(dr.known ? 1.0 : 0.0);
            }
        }
        if (spec.has(G::History)) {
            const DirectionalRatios dr = encoder.history(rec.vote.occupant_id);
            row.insert(row.end(), dr.ratios.begin(), dr.ratios.end());
            row.push_back(dr.known ? 1.0 : 0.0);
        }

        matrix.vote_ids.push_back(rec.vote.vote_id);
        matrix.occupant_ids.push_back(rec.vote.occupant_id);
        matrix.rows.push_back(std::move(row));
        matrix.labels.push_back(rec.vote.class_of(dimension));
        ++stats.rows_kept;
    }

    if (matrix.empty()) {
        throw EmptyMatrixError("no rows survive feature set " + spec.name + " for dimension " +
                               std::string(dimension_name(dimension)));
    }
    return {std::move(matrix), std::move(stats)};
}

void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& matrix,
                              const std::map<std::string, std::string>& vote_split) {
    CsvWriter w(path);
    std::vector<std::string> header{"vote_id", "occupant_id", "split", "label"};
    header.insert(header.end(), matrix.feature_names.begin(), matrix.feature_names.end());
    w.row(header);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        const auto split_it = vote_split.find(matrix.vote_ids[i]);
        std::vector<std::string> row{
            matrix.vote_ids[i], matrix.occupant_ids[i],
            split_it == vote_split.end() ? "none" : split_it->second,
            std::string(class_label(matrix.dimension, matrix.labels[i]))};
        for (const double v : matrix.rows[i]) row.push_back(format_double(v));
        w.row(row);
    }
}

std::string feature_sets_to_json(std::span<const FeatureSetSpec> specs) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& spec : specs) {
        nlohmann::json groups = nlohmann::json::array();
        for (const FeatureGroup g : spec.include) groups.push_back(feature_group_name(g));
        j[spec.name] = groups;
    }
    return j.dump(2) + "\n";
}

}  // namespace comfort
