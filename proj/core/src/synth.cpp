#include "comfort/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/ingest.hpp"
#include "comfort/rng.hpp"

namespace comfort {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Burst {
    std::int64_t start_s = 0;  // seconds into the day
    std::int64_t duration_s = 0;
    double amplitude_db = 0;
};

// Daylight factor: 0 at night, ramping 07-09 up and 17-19 down.
double daylight_factor(double hour) {
    if (hour < 7.0 || hour >= 19.0) return 0.0;
    if (hour < 9.0) return (hour - 7.0) / 2.0;
    if (hour < 17.0) return 1.0;
    return (19.0 - hour) / 2.0;
}

struct Environment {
    std::vector<ZoneSchedule> schedules;
    std::vector<std::vector<std::vector<Burst>>> bursts;  // [zone][day] -> bursts

    double temperature(std::size_t zone, double hour) const {
        const ZoneSchedule& s = schedules[zone];
        return s.temp_base_c + s.temp_amp_c * std::sin(kTau * (hour - s.temp_phase_h + 6.0) / 24.0);
    }

    double humidity(std::size_t zone, double hour) const {
        return std::clamp(60.0 + 12.0 * std::sin(kTau * (hour - 4.0) / 24.0 +
                                                 static_cast<double>(zone)),
                          0.0, 100.0);
    }

    double illuminance(std::size_t zone, double hour) const {
        const ZoneSchedule& s = schedules[zone];
        return s.lux_night + (s.lux_day - s.lux_night) * daylight_factor(hour);
    }

    double noise(std::size_t zone, int day, std::int64_t sec_of_day) const {
        const ZoneSchedule& s = schedules[zone];
        double level = s.noise_base_db;
        for (const Burst& burst : bursts[zone][static_cast<std::size_t>(day)]) {
            if (sec_of_day >= burst.start_s && sec_of_day < burst.start_s + burst.duration_s)
                level += burst.amplitude_db;
        }
        return std::min(level, 100.0);
    }
};

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

void validate(const SimConfig& cfg) {
    if (cfg.n_occupants < 1 || cfg.n_zones < 1 || cfg.days < 1)
        throw InvalidConfigError("occupants, zones and days must all be >= 1");
    if (cfg.votes_per_day_min < 1 || cfg.votes_per_day_max > 50 ||
        cfg.votes_per_day_min > cfg.votes_per_day_max)
        throw InvalidConfigError("votes_per_day range must lie within [1, 50]");
    if (cfg.vote_day_start_h < 0 || cfg.vote_day_end_h > 24 ||
        cfg.vote_day_start_h >= cfg.vote_day_end_h)
        throw InvalidConfigError("voting hours must satisfy 0 <= start < end <= 24");
    if (cfg.archetype_mix.empty()) throw InvalidConfigError("archetype mix is empty");
    for (const auto& [archetype, weight] : cfg.archetype_mix) {
        if (archetype.response_noise < 0 || archetype.response_noise >= 0.5)
            throw InvalidConfigError("response_noise must lie in [0, 0.5)");
        if (weight <= 0) throw InvalidConfigError("archetype weights must be positive");
    }
    if (!cfg.zone_schedules.empty() &&
        cfg.zone_schedules.size() != static_cast<std::size_t>(cfg.n_zones))
        throw InvalidConfigError("zone_schedules must be empty or match n_zones");
    if (cfg.sensor_cadence_s < 1 || cfg.sensor_cadence_s > 3600)
        throw InvalidConfigError("sensor cadence must lie within [1, 3600] seconds");
}

int rule_class(double value, double hi, double lo) {
    if (value > hi) return 0;  // negative direction: cooler / dimmer / quieter
    if (value < lo) return 2;  // positive direction: warmer / brighter / louder
    return 1;
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
    validate(cfg);
    const Timezone tz = parse_timezone(cfg.timezone);
    const Instant start = instant_from_civil(CivilTime{{2025, 3, 3}, 0, 0, 0}, tz);  // a Monday

    Rng rng(cfg.seed);
    SimResult result;

    // Zones: 10x10 m squares in a row on floor 1.
    std::vector<Zone> zones;
    for (int z = 0; z < cfg.n_zones; ++z) {
        Zone zone;
        zone.zone_id = "zone-" + zero_pad(z + 1, 2);
        zone.floor = 1;
        const double x0 = z * 12.0;
        zone.polygon = {{x0, 0.0}, {x0 + 10.0, 0.0}, {x0 + 10.0, 10.0}, {x0, 10.0}};
        zone.label = "Zone " + zero_pad(z + 1, 2);
        zone.area = 100.0;
        zones.push_back(std::move(zone));
    }
    result.zones = ZoneMap(zones);

    Environment env;
    if (!cfg.zone_schedules.empty()) {
        env.schedules = cfg.zone_schedules;
    } else {
        for (int z = 0; z < cfg.n_zones; ++z) {
            ZoneSchedule s;
            s.temp_base_c = rng.uniform(22.5, 25.5);
            s.temp_amp_c = rng.uniform(3.5, 6.0);
            s.temp_phase_h = rng.uniform(13.0, 17.0);
            s.lux_day = rng.uniform(450.0, 950.0);
            s.lux_night = rng.uniform(20.0, 60.0);
            s.noise_base_db = rng.uniform(33.0, 40.0);
            s.bursts_per_day = static_cast<int>(rng.uniform_int(2, 5));
            s.burst_db = rng.uniform(18.0, 32.0);
            env.schedules.push_back(s);
        }
    }
    env.bursts.resize(static_cast<std::size_t>(cfg.n_zones));
    for (int z = 0; z < cfg.n_zones; ++z) {
        env.bursts[static_cast<std::size_t>(z)].resize(static_cast<std::size_t>(cfg.days));
        for (int day = 0; day < cfg.days; ++day) {
            auto& day_bursts = env.bursts[static_cast<std::size_t>(z)][static_cast<std::size_t>(day)];
            const ZoneSchedule& s = env.schedules[static_cast<std::size_t>(z)];
            for (int b = 0; b < s.bursts_per_day; ++b) {
                Burst burst;
                burst.start_s = rng.uniform_int(8 * 3600, 19 * 3600);
                burst.duration_s = rng.uniform_int(600, 2400);
                burst.amplitude_db = s.burst_db + rng.uniform(-4.0, 4.0);
                day_bursts.push_back(burst);
            }
        }
    }

    // Sensor stream: one sensor per zone at a fixed cadence.
    const std::int64_t horizon_s = static_cast<std::int64_t>(cfg.days) * 86400;
    const std::int64_t n_ticks = horizon_s / cfg.sensor_cadence_s;
    for (int z = 0; z < cfg.n_zones; ++z) {
        const std::string sensor_id = "sensor-" + zero_pad(z + 1, 2);
        for (std::int64_t tick = 0; tick < n_ticks; ++tick) {
            const std::int64_t offset = tick * cfg.sensor_cadence_s;
            const int day = static_cast<int>(offset / 86400);
            const std::int64_t sec_of_day = offset % 86400;
            const double hour = static_cast<double>(sec_of_day) / 3600.0;
            SensorReading r;
            r.sensor_id = sensor_id;
            r.zone_id = zones[static_cast<std::size_t>(z)].zone_id;
            r.timestamp = start + offset;
            r.temperature_c = env.temperature(static_cast<std::size_t>(z), hour);
            r.humidity_rh = env.humidity(static_cast<std::size_t>(z), hour);
            r.noise_db = env.noise(static_cast<std::size_t>(z), day, sec_of_day);
            r.illuminance_lux = env.illuminance(static_cast<std::size_t>(z), hour);
            result.readings.push_back(std::move(r));
        }
    }

    // Matches fusion's nearest-in-time with ties toward the earlier reading.
    const auto nearest_tick = [&](std::int64_t offset) {
        const std::int64_t lower = std::min(offset / cfg.sensor_cadence_s, n_ticks - 1);
        const std::int64_t d_low = offset - lower * cfg.sensor_cadence_s;
        const std::int64_t d_high = cfg.sensor_cadence_s - d_low;
        if (lower + 1 >= n_ticks || d_low <= d_high) return lower;
        return lower + 1;
    };

    // Occupants: weighted archetype assignment, a home zone, wearable offsets.
    struct OccupantState {
        std::string id;
        std::size_t archetype_idx = 0;
        int home_zone = 0;
        double nbt_offset = 0;
    };
    double total_weight = 0;
    for (const auto& [_, weight] : cfg.archetype_mix) total_weight += weight;
    std::vector<OccupantState> occupants;
    for (int o = 0; o < cfg.n_occupants; ++o) {
        OccupantState state;
        state.id = "occ-" + zero_pad(o + 1, 2);
        const double pick = rng.unit() * total_weight;
        double acc = 0;
        state.archetype_idx = cfg.archetype_mix.size() - 1;
        for (std::size_t a = 0; a < cfg.archetype_mix.size(); ++a) {
            acc += cfg.archetype_mix[a].second;
            if (pick < acc) {
                state.archetype_idx = a;
                break;
            }
        }
        state.home_zone = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_zones)));
        state.nbt_offset = rng.uniform(2.0, 5.0);
        occupants.push_back(std::move(state));
        result.truth.occupant_archetype[occupants.back().id] =
            cfg.archetype_mix[occupants.back().archetype_idx].first.name;
    }
    for (const auto& [archetype, _] : cfg.archetype_mix)
        result.truth.archetypes[archetype.name] = archetype;
    result.truth.rule = cfg.rule;
    for (int z = 0; z < cfg.n_zones; ++z)
        result.truth.zone_schedules[zones[static_cast<std::size_t>(z)].zone_id] =
            env.schedules[static_cast<std::size_t>(z)];

    // Hour-slot zone schedule: 55% home zone, otherwise uniform. Hashed per
    // (occupant, slot) so it is independent of generation order.
    const auto zone_at = [&](int occ_idx, std::int64_t offset) {
        if (cfg.n_zones == 1) return 0;
        const std::int64_t slot = offset / 3600;
        Rng slot_rng(mix_seed(cfg.seed, 0x10000 + static_cast<std::uint64_t>(occ_idx),
                              static_cast<std::uint64_t>(slot)));
        if (slot_rng.unit() < 0.55) return occupants[static_cast<std::size_t>(occ_idx)].home_zone;
        return static_cast<int>(slot_rng.below(static_cast<std::uint64_t>(cfg.n_zones)));
    };

    const auto day_start_s = static_cast<std::int64_t>(cfg.vote_day_start_h * 3600.0);
    const auto day_end_s = static_cast<std::int64_t>(cfg.vote_day_end_h * 3600.0);
    double min_noise_floor_db = env.schedules.front().noise_base_db;
    for (const auto& s : env.schedules)
        min_noise_floor_db = std::min(min_noise_floor_db, s.noise_base_db);
    int vote_counter = 0;
    for (int o = 0; o < cfg.n_occupants; ++o) {
        const OccupantState& occ = occupants[static_cast<std::size_t>(o)];
        const Archetype& archetype = cfg.archetype_mix[occ.archetype_idx].first;
        for (int day = 0; day < cfg.days; ++day) {
            const int n_votes =
                static_cast<int>(rng.uniform_int(cfg.votes_per_day_min, cfg.votes_per_day_max));
            std::vector<std::int64_t> times;
            for (int v = 0; v < n_votes; ++v)
                times.push_back(rng.uniform_int(day_start_s, day_end_s - 1));
            std::sort(times.begin(), times.end());
            times.erase(std::unique(times.begin(), times.end()), times.end());

            for (const std::int64_t sec_of_day : times) {
                const std::int64_t offset = static_cast<std::int64_t>(day) * 86400 + sec_of_day;
                const int zone_idx = zone_at(o, offset);
                const auto zu = static_cast<std::size_t>(zone_idx);
                const std::int64_t tick = nearest_tick(offset);
                const std::int64_t tick_offset = tick * cfg.sensor_cadence_s;
                const int tick_day = static_cast<int>(tick_offset / 86400);
                const double tick_hour = static_cast<double>(tick_offset % 86400) / 3600.0;

                const double temp = env.temperature(zu, tick_hour);
                const double lux = env.illuminance(zu, tick_hour);
                const double db = env.noise(zu, tick_day, tick_offset % 86400);

                FeedbackVote vote;
                vote.vote_id = "v-" + zero_pad(++vote_counter, 6);
                vote.occupant_id = occ.id;
                vote.timestamp = start + offset;
                vote.thermal = rule_class(temp, cfg.rule.thermal_hi_c + archetype.thermal_bias_c,
                                          cfg.rule.thermal_lo_c + archetype.thermal_bias_c);
                vote.light = rule_class(lux, cfg.rule.lux_hi + archetype.light_bias_lux,
                                        cfg.rule.lux_lo + archetype.light_bias_lux);
                vote.noise = rule_class(db, cfg.rule.noise_hi_db + archetype.noise_bias_db,
                                        cfg.rule.noise_lo_db + archetype.noise_bias_db);
                result.truth.clean_labels[vote.vote_id] = {vote.thermal, vote.light, vote.noise};

                // Flip to a uniformly random other reachable class with
                // p = response_noise. Classes the rule can never produce stay
                // empty (prefer_louder by default), so noisy runs still
                // exercise the merged-cluster path.
                const bool louder_reachable =
                    cfg.rule.noise_lo_db + archetype.noise_bias_db > min_noise_floor_db;
                const std::array<std::pair<int*, int>, 3> flips{{
                    {&vote.thermal, 3},
                    {&vote.light, 3},
                    {&vote.noise, louder_reachable ? 3 : 2},
                }};
                for (const auto& [cls, n_reachable] : flips) {
                    if (archetype.response_noise > 0 && rng.unit() < archetype.response_noise) {
                        const int shift =
                            1 + static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(n_reachable - 1)));
                        *cls = (*cls + shift) % n_reachable;
                    }
                }
                result.votes.push_back(vote);

                LocalizationFix fix;
                fix.occupant_id = occ.id;
                fix.timestamp = vote.timestamp - rng.uniform_int(0, 60);
                fix.x_m = zone_idx * 12.0 + rng.uniform(1.0, 9.0);
                fix.y_m = rng.uniform(1.0, 9.0);
                fix.floor = 1;
                result.fixes.push_back(std::move(fix));

                WearableSample sample;
                sample.occupant_id = occ.id;
                sample.timestamp = vote.timestamp - rng.uniform_int(0, 120);
                sample.near_body_temp_c =
                    std::clamp(temp + occ.nbt_offset + rng.uniform(-0.2, 0.2), 10.0, 45.0);
                sample.heart_rate_bpm =
                    std::clamp(68.0 + 14.0 * daylight_factor(tick_hour) + rng.uniform(-6.0, 14.0),
                               25.0, 230.0);
                result.wearables.push_back(std::move(sample));
            }
        }
    }

    sort_votes(result.votes);
    sort_readings(result.readings);
    sort_fixes(result.fixes);
    sort_wearables(result.wearables);
    return result;
}

void write_dataset(const SimResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_votes_csv(dir / "votes.csv", result.votes);
    write_sensor_readings_csv(dir / "sensors.csv", result.readings);
    write_localization_csv(dir / "localization.csv", result.fixes);
    write_wearable_csv(dir / "wearable.csv", result.wearables);
    write_zone_map_geojson(dir / "zones.geojson", result.zones);
    write_text_file(dir / "ground_truth.json", ground_truth_to_json(result.truth));
}

namespace {

nlohmann::json archetype_to_json(const Archetype& a) {
    return {{"name", a.name},
            {"thermal_bias_c", a.thermal_bias_c},
            {"light_bias_lux", a.light_bias_lux},
            {"noise_bias_db", a.noise_bias_db},
            {"response_noise", a.response_noise}};
}

Archetype archetype_from_json(const nlohmann::json& j) {
    Archetype a;
    a.name = j.at("name").get<std::string>();
    a.thermal_bias_c = j.at("thermal_bias_c").get<double>();
    a.light_bias_lux = j.at("light_bias_lux").get<double>();
    a.noise_bias_db = j.at("noise_bias_db").get<double>();
    a.response_noise = j.at("response_noise").get<double>();
    return a;
}

}  // namespace

std::string ground_truth_to_json(const GroundTruth& truth) {
    nlohmann::json archetypes = nlohmann::json::object();
    for (const auto& [name, a] : truth.archetypes) archetypes[name] = archetype_to_json(a);
    nlohmann::json schedules = nlohmann::json::object();
    for (const auto& [zone, s] : truth.zone_schedules) {
        schedules[zone] = {{"temp_base_c", s.temp_base_c},   {"temp_amp_c", s.temp_amp_c},
                           {"temp_phase_h", s.temp_phase_h}, {"lux_day", s.lux_day},
                           {"lux_night", s.lux_night},       {"noise_base_db", s.noise_base_db},
                           {"bursts_per_day", s.bursts_per_day}, {"burst_db", s.burst_db}};
    }
    nlohmann::json clean = nlohmann::json::object();
    for (const auto& [vote_id, labels] : truth.clean_labels)
        clean[vote_id] = {labels[0], labels[1], labels[2]};
    nlohmann::json j{{"archetypes", archetypes},
                     {"occupant_archetype", truth.occupant_archetype},
                     {"rule",
                      {{"thermal_hi_c", truth.rule.thermal_hi_c},
                       {"thermal_lo_c", truth.rule.thermal_lo_c},
                       {"lux_hi", truth.rule.lux_hi},
                       {"lux_lo", truth.rule.lux_lo},
                       {"noise_hi_db", truth.rule.noise_hi_db},
                       {"noise_lo_db", truth.rule.noise_lo_db}}},
                     {"zone_schedules", schedules},
                     {"clean_labels", clean}};
    return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    GroundTruth truth;
    for (const auto& [name, a] : j.at("archetypes").items())
        truth.archetypes[name] = archetype_from_json(a);
    truth.occupant_archetype =
        j.at("occupant_archetype").get<std::map<std::string, std::string>>();
    const auto& rule = j.at("rule");
    truth.rule.thermal_hi_c = rule.at("thermal_hi_c").get<double>();
    truth.rule.thermal_lo_c = rule.at("thermal_lo_c").get<double>();
    truth.rule.lux_hi = rule.at("lux_hi").get<double>();
    truth.rule.lux_lo = rule.at("lux_lo").get<double>();
    truth.rule.noise_hi_db = rule.at("noise_hi_db").get<double>();
    truth.rule.noise_lo_db = rule.at("noise_lo_db").get<double>();
    for (const auto& [zone, s] : j.at("zone_schedules").items()) {
        ZoneSchedule schedule;
        schedule.temp_base_c = s.at("temp_base_c").get<double>();
        schedule.temp_amp_c = s.at("temp_amp_c").get<double>();
        schedule.temp_phase_h = s.at("temp_phase_h").get<double>();
        schedule.lux_day = s.at("lux_day").get<double>();
        schedule.lux_night = s.at("lux_night").get<double>();
        schedule.noise_base_db = s.at("noise_base_db").get<double>();
        schedule.bursts_per_day = s.at("bursts_per_day").get<int>();
        schedule.burst_db = s.at("burst_db").get<double>();
        truth.zone_schedules[zone] = schedule;
    }
    for (const auto& [vote_id, labels] : j.at("clean_labels").items()) {
        truth.clean_labels[vote_id] = {labels.at(0).get<int>(), labels.at(1).get<int>(),
                                       labels.at(2).get<int>()};
    }
    return truth;
}

}  // namespace comfort
