#include "comfort/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/fusion.hpp"
#include "comfort/sha256.hpp"
#include "comfort/tendency.hpp"

namespace comfort {

namespace fs = std::filesystem;
using nlohmann::json;

int RunConfig::resolved_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

void require_artifact(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw MissingArtifactError(path.string() + " not found; run `" + producer + "` first");
    }
}

InputPaths resolved_inputs(const RunConfig& cfg) {
    if (cfg.inputs) return *cfg.inputs;
    InputPaths inputs;
    const fs::path raw = cfg.out_dir / "raw";
    inputs.votes = raw / "votes.csv";
    inputs.sensors = raw / "sensors.csv";
    inputs.localization = raw / "localization.csv";
    inputs.wearable = raw / "wearable.csv";
    inputs.zones = raw / "zones.geojson";
    return inputs;
}

EvalOptions eval_options(const RunConfig& cfg, const ClusterModel* room_clusters = nullptr) {
    EvalOptions opts;
    opts.forest = cfg.forest;
    opts.tz = cfg.tz();
    opts.threads = cfg.resolved_threads();
    opts.leaky_profiles = cfg.leaky_profiles;
    opts.min_votes = cfg.min_votes;
    opts.build.room_as_cluster_label = cfg.room_as_cluster_label;
    opts.build.room_clusters = room_clusters;
    return opts;
}

std::vector<FeatureSetSpec> resolved_feature_sets(const std::vector<std::string>& names) {
    std::vector<FeatureSetSpec> specs;
    for (const std::string& name : names) {
        if (name == "all") return default_feature_sets();
        const auto spec = find_feature_set(name);
        if (!spec) throw ConfigError("unknown feature set: " + name);
        specs.push_back(*spec);
    }
    if (specs.empty()) throw ConfigError("no feature sets configured");
    return specs;
}

std::vector<Dimension> resolved_dimensions(const std::vector<std::string>& names) {
    std::vector<Dimension> dims;
    for (const std::string& name : names) {
        const auto dim = parse_dimension(name);
        if (!dim) throw ConfigError("unknown dimension: " + name);
        dims.push_back(*dim);
    }
    if (dims.empty()) throw ConfigError("no dimensions configured");
    return dims;
}

std::string model_filename(const std::string& spec, Dimension dim) {
    return "forest_" + spec + "_" + std::string(dimension_name(dim)) + ".json";
}

std::string features_filename(const std::string& spec, Dimension dim) {
    return "features_" + spec + "_" + std::string(dimension_name(dim)) + ".csv";
}

// Room clustering for the cluster-label encoding runs on training records
// only, like every other model input.
std::optional<ClusterModel> fit_room_clusters(const RunConfig& cfg,
                                              std::span<const FusedRecord> records,
                                              const SplitPlan& split) {
    if (!cfg.room_as_cluster_label) return std::nullopt;
    std::vector<FusedRecord> train;
    for (const FusedRecord& rec : records) {
        if (split.is_train(rec.vote.occupant_id, rec.vote.vote_id)) train.push_back(rec);
    }
    const auto profiles = room_profiles(train);
    const int k = std::min<int>(3, static_cast<int>(profiles.size()));
    return kmeans_fit(profiles, k, cfg.seed, cfg.cluster_restarts);
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");

    RunConfig cfg;
    try {
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("timezone")) cfg.timezone = j.at("timezone").get<std::string>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();

        if (j.contains("inputs")) {
            const auto& in = j.at("inputs");
            InputPaths inputs;
            inputs.votes = in.at("votes").get<std::string>();
            inputs.sensors = in.at("sensors").get<std::string>();
            inputs.localization = in.at("localization").get<std::string>();
            inputs.wearable = in.at("wearable").get<std::string>();
            inputs.zones = in.at("zones").get<std::string>();
            if (in.contains("format")) {
                const auto fmt = parse_file_format(in.at("format").get<std::string>());
                if (!fmt) throw ConfigError("inputs.format must be csv or jsonl");
                inputs.format = *fmt;
            }
            cfg.inputs = inputs;
        }
        if (j.contains("horizon")) {
            const auto t = parse_rfc3339(j.at("horizon").get<std::string>());
            if (!t) throw ConfigError("horizon must be RFC 3339");
            cfg.horizon = t;
        }
        if (j.contains("fusion")) {
            const auto& f = j.at("fusion");
            cfg.fusion.env_window_s = f.value("env_window_s", cfg.fusion.env_window_s);
            cfg.fusion.wearable_window_s =
                f.value("wearable_window_s", cfg.fusion.wearable_window_s);
            cfg.fusion.localization_window_s =
                f.value("localization_window_s", cfg.fusion.localization_window_s);
            if (cfg.fusion.env_window_s <= 0 || cfg.fusion.wearable_window_s <= 0 ||
                cfg.fusion.localization_window_s <= 0)
                throw ConfigError("fusion windows must be positive");
        }
        if (j.contains("features")) {
            const auto& f = j.at("features");
            if (f.contains("sets")) cfg.feature_sets = f.at("sets").get<std::vector<std::string>>();
            cfg.leaky_profiles = f.value("leaky_profiles", false);
            cfg.room_as_cluster_label = f.value("room_as_cluster_label", false);
        }
        if (j.contains("forest")) {
            const auto& f = j.at("forest");
            cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
            cfg.forest.min_samples_split =
                f.value("min_samples_split", cfg.forest.min_samples_split);
            cfg.forest.bootstrap = f.value("bootstrap", cfg.forest.bootstrap);
            if (f.contains("max_features")) {
                const auto& mf = f.at("max_features");
                if (mf.is_string() && mf.get<std::string>() == "sqrt") {
                    cfg.forest.max_features = 0;
                } else if (mf.is_number_integer()) {
                    cfg.forest.max_features = mf.get<int>();
                } else {
                    throw ConfigError("forest.max_features must be \"sqrt\" or an integer");
                }
            }
        }
        if (j.contains("cluster")) {
            const auto& c = j.at("cluster");
            cfg.cluster_k = c.value("k", cfg.cluster_k);
            cfg.cluster_restarts = c.value("restarts", cfg.cluster_restarts);
            cfg.cluster_per_dimension = c.value("per_dimension", cfg.cluster_per_dimension);
        }
        if (j.contains("eval")) {
            const auto& e = j.at("eval");
            if (e.contains("dimensions"))
                cfg.dimensions = e.at("dimensions").get<std::vector<std::string>>();
            cfg.min_votes = e.value("min_votes", cfg.min_votes);
        }
        if (j.contains("coldstart")) {
            const auto& c = j.at("coldstart");
            cfg.coldstart_enabled = c.value("enabled", false);
            cfg.coldstart_R = c.value("R", cfg.coldstart_R);
            cfg.coldstart_max_k = c.value("max_k", cfg.coldstart_max_k);
            cfg.coldstart_feature_set = c.value("feature_set", cfg.coldstart_feature_set);
        }
        if (j.contains("forecast")) {
            const auto& f = j.at("forecast");
            if (f.contains("zones"))
                cfg.forecast_zones = f.at("zones").get<std::vector<std::string>>();
            cfg.forecast_grid_minutes = f.value("grid_minutes", cfg.forecast_grid_minutes);
        }
        if (j.contains("simulate")) {
            const auto& s = j.at("simulate");
            cfg.simulate_enabled = s.value("enabled", true);
            cfg.sim.n_occupants = s.value("occupants", cfg.sim.n_occupants);
            cfg.sim.n_zones = s.value("zones", cfg.sim.n_zones);
            cfg.sim.days = s.value("days", cfg.sim.days);
            if (s.contains("votes_per_day")) {
                const auto range = s.at("votes_per_day").get<std::vector<int>>();
                if (range.size() != 2) throw ConfigError("votes_per_day must be [min, max]");
                cfg.sim.votes_per_day_min = range[0];
                cfg.sim.votes_per_day_max = range[1];
            }
            if (s.contains("response_noise")) {
                for (auto& [archetype, _] : cfg.sim.archetype_mix)
                    archetype.response_noise = s.at("response_noise").get<double>();
            }
            if (s.contains("archetypes")) {
                cfg.sim.archetype_mix.clear();
                for (const auto& a : s.at("archetypes")) {
                    Archetype archetype;
                    archetype.name = a.at("name").get<std::string>();
                    archetype.thermal_bias_c = a.value("thermal_bias_c", 0.0);
                    archetype.light_bias_lux = a.value("light_bias_lux", 0.0);
                    archetype.noise_bias_db = a.value("noise_bias_db", 0.0);
                    archetype.response_noise = a.value("response_noise", 0.0);
                    cfg.sim.archetype_mix.emplace_back(archetype, a.value("weight", 1.0));
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    cfg.sim.seed = cfg.seed;
    cfg.sim.timezone = cfg.timezone;
    cfg.forest.master_seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    return run_config_from_json_text(read_text_file(path));
}

Manifest Manifest::load(const fs::path& out_dir) {
    Manifest manifest;
    const fs::path path = out_dir / "manifest.json";
    if (!fs::exists(path)) return manifest;
    const json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return manifest;
    if (j.contains("files") && j.at("files").is_object()) {
        for (const auto& [file, hash] : j.at("files").items()) {
            if (hash.is_string()) manifest.files_[file] = hash.get<std::string>();
        }
    }
    return manifest;
}

void Manifest::record(const fs::path& out_dir, const fs::path& file) {
    files_[fs::relative(file, out_dir).generic_string()] = sha256_file_hex(file);
}

void Manifest::write(const fs::path& out_dir, std::uint64_t seed) const {
    const json j{{"seed", seed}, {"files", files_}};
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void stage_simulate(const RunConfig& cfg) {
    const fs::path raw = cfg.out_dir / "raw";
    const SimResult result = simulate(cfg.sim);
    write_dataset(result, raw);

    Manifest manifest = Manifest::load(cfg.out_dir);
    for (const char* name : {"votes.csv", "sensors.csv", "localization.csv", "wearable.csv",
                             "zones.geojson", "ground_truth.json"})
        manifest.record(cfg.out_dir, raw / name);
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "simulate: " << result.votes.size() << " votes, " << result.readings.size()
              << " readings, " << result.zones.size() << " zones -> " << raw.string() << "\n";
}

void stage_ingest(const RunConfig& cfg) {
    const InputPaths inputs = resolved_inputs(cfg);
    for (const auto& path :
         {inputs.votes, inputs.sensors, inputs.localization, inputs.wearable, inputs.zones})
        require_artifact(path, "simulate (or point inputs at existing files)");

    LoadOptions opts;
    opts.horizon = cfg.horizon;
    auto votes = load_votes(inputs.votes, inputs.format, opts);
    auto readings = load_sensor_readings(inputs.sensors, inputs.format, opts);
    auto fixes = load_localization(inputs.localization, inputs.format, opts);
    auto wearables = load_wearable(inputs.wearable, inputs.format, opts);
    const ZoneMap zones = load_zone_map(inputs.zones);

    auto [kept_readings, zone_rejects] = cross_validate_readings(std::move(readings.records),
                                                                 zones);
    readings.records = std::move(kept_readings);
    readings.rejects.insert(readings.rejects.end(), zone_rejects.begin(), zone_rejects.end());

    const fs::path canonical = cfg.out_dir / "canonical";
    const fs::path rejects = cfg.out_dir / "rejects";
    fs::create_directories(canonical);
    fs::create_directories(rejects);
    write_votes_csv(canonical / "votes.csv", votes.records);
    write_sensor_readings_csv(canonical / "sensors.csv", readings.records);
    write_localization_csv(canonical / "localization.csv", fixes.records);
    write_wearable_csv(canonical / "wearable.csv", wearables.records);
    write_zone_map_geojson(canonical / "zones.geojson", zones);
    write_rejects_csv(rejects / "votes.csv", votes.rejects);
    write_rejects_csv(rejects / "sensors.csv", readings.rejects);
    write_rejects_csv(rejects / "localization.csv", fixes.rejects);
    write_rejects_csv(rejects / "wearable.csv", wearables.rejects);

    const json summary{
        {"votes", {{"accepted", votes.records.size()}, {"rejected", votes.rejects.size()}}},
        {"sensors",
         {{"accepted", readings.records.size()}, {"rejected", readings.rejects.size()}}},
        {"localization",
         {{"accepted", fixes.records.size()}, {"rejected", fixes.rejects.size()}}},
        {"wearable",
         {{"accepted", wearables.records.size()}, {"rejected", wearables.rejects.size()}}},
        {"zones", zones.size()}};
    write_text_file(cfg.out_dir / "ingest_summary.json", summary.dump(2) + "\n");

    Manifest manifest = Manifest::load(cfg.out_dir);
    for (const char* name : {"votes.csv", "sensors.csv", "localization.csv", "wearable.csv"}) {
        manifest.record(cfg.out_dir, canonical / name);
        manifest.record(cfg.out_dir, rejects / name);
    }
    manifest.record(cfg.out_dir, canonical / "zones.geojson");
    manifest.record(cfg.out_dir, cfg.out_dir / "ingest_summary.json");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "ingest: " << votes.records.size() << " votes (" << votes.rejects.size()
              << " rejected), " << readings.records.size() << " readings, "
              << fixes.records.size() << " fixes, " << wearables.records.size()
              << " wearable samples\n";
}

void stage_fuse(const RunConfig& cfg) {
    const fs::path canonical = cfg.out_dir / "canonical";
    for (const char* name : {"votes.csv", "sensors.csv", "localization.csv", "wearable.csv"})
        require_artifact(canonical / name, "ingest");
    require_artifact(canonical / "zones.geojson", "ingest");

    const auto votes = load_votes(canonical / "votes.csv", FileFormat::Csv);
    const auto readings = load_sensor_readings(canonical / "sensors.csv", FileFormat::Csv);
    const auto fixes = load_localization(canonical / "localization.csv", FileFormat::Csv);
    const auto wearables = load_wearable(canonical / "wearable.csv", FileFormat::Csv);
    const ZoneMap zones = load_zone_map(canonical / "zones.geojson");

    const auto [records, stats] = fuse_dataset(votes.records, fixes.records, readings.records,
                                               wearables.records, zones, cfg.fusion);
    write_fused_csv(cfg.out_dir / "fused.csv", records);
    write_text_file(cfg.out_dir / "fusion_stats.json", fusion_stats_to_json(stats));

    Manifest manifest = Manifest::load(cfg.out_dir);
    manifest.record(cfg.out_dir, cfg.out_dir / "fused.csv");
    manifest.record(cfg.out_dir, cfg.out_dir / "fusion_stats.json");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "fuse: " << stats.total_votes << " votes -> " << stats.zone_resolved
              << " zone-resolved, " << stats.env_matched << " env-matched\n";
}

void stage_cluster(const RunConfig& cfg) {
    require_artifact(cfg.out_dir / "fused.csv", "fuse");
    const auto records = read_fused_csv(cfg.out_dir / "fused.csv");

    const auto occupant_vectors = vote_ratios(records, SubjectKind::Occupant);
    const auto room_vectors = room_profiles(records);

    std::vector<TendencyVector> all_vectors = occupant_vectors;
    all_vectors.insert(all_vectors.end(), room_vectors.begin(), room_vectors.end());
    write_tendencies_csv(cfg.out_dir / "tendencies.csv", all_vectors);

    const auto fit = [&](const std::vector<TendencyVector>& vectors) {
        const int k = std::min<int>(cfg.cluster_k, static_cast<int>(vectors.size()));
        return kmeans_fit(vectors, k, cfg.seed, cfg.cluster_restarts);
    };
    const ClusterModel occupant_model = fit(occupant_vectors);
    const ClusterModel room_model = fit(room_vectors);

    json clusters{{"occupant", json::parse(cluster_model_to_json(occupant_model))},
                  {"room", json::parse(cluster_model_to_json(room_model))}};
    if (cfg.cluster_per_dimension) {
        json by_dim = json::object();
        for (const Dimension dim :
             {Dimension::Thermal, Dimension::Light, Dimension::Noise}) {
            const int k = std::min<int>(3, static_cast<int>(occupant_vectors.size()));
            const ClusterModel model =
                kmeans_fit_dimension(occupant_vectors, dim, k, cfg.seed, cfg.cluster_restarts);
            by_dim[std::string(dimension_name(dim))] =
                json::parse(cluster_model_to_json(model));
        }
        clusters["occupant_by_dimension"] = std::move(by_dim);
    }
    write_text_file(cfg.out_dir / "clusters.json", clusters.dump(2) + "\n");

    Manifest manifest = Manifest::load(cfg.out_dir);
    manifest.record(cfg.out_dir, cfg.out_dir / "tendencies.csv");
    manifest.record(cfg.out_dir, cfg.out_dir / "clusters.json");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "cluster: " << occupant_vectors.size() << " occupants -> k="
              << occupant_model.k << " (dropped:";
    if (occupant_model.dropped_classes.empty()) std::cout << " none";
    for (const auto& c : occupant_model.dropped_classes) std::cout << " " << c;
    std::cout << "), " << room_vectors.size() << " rooms -> k=" << room_model.k << "\n";
}

void stage_featurize(const RunConfig& cfg) {
    const auto specs = resolved_feature_sets(cfg.feature_sets);
    const auto dims = resolved_dimensions(cfg.dimensions);
    require_artifact(cfg.out_dir / "fused.csv", "fuse");
    const auto records = read_fused_csv(cfg.out_dir / "fused.csv");
    const SplitPlan split = temporal_split(records, cfg.min_votes);
    write_text_file(cfg.out_dir / "split_plan.json", split_plan_to_json(split));
    const auto room_clusters = fit_room_clusters(cfg, records, split);

    // Profiles (Room/History) always come from the training split, so the
    // emitted rows are leak-free for both splits.
    std::vector<FusedRecord> split_records;
    std::map<std::string, std::string> vote_split;
    for (const FusedRecord& rec : records) {
        const auto it = split.by_occupant.find(rec.vote.occupant_id);
        if (it == split.by_occupant.end()) continue;  // excluded occupant
        const bool is_train = split.is_train(rec.vote.occupant_id, rec.vote.vote_id);
        vote_split[rec.vote.vote_id] = is_train ? "train" : "test";
        split_records.push_back(rec);
    }
    std::vector<FusedRecord> train_records;
    for (const FusedRecord& rec : split_records)
        if (vote_split.at(rec.vote.vote_id) == "train") train_records.push_back(rec);

    BuildOptions build;
    build.room_as_cluster_label = cfg.room_as_cluster_label;
    build.room_clusters = room_clusters ? &*room_clusters : nullptr;
    const ProfileEncoder encoder(cfg.leaky_profiles
                                     ? std::span<const FusedRecord>(split_records)
                                     : std::span<const FusedRecord>(train_records));

    Manifest manifest = Manifest::load(cfg.out_dir);
    json exclusions = json::object();
    std::size_t files = 0;
    for (const auto& spec : specs) {
        for (const Dimension dim : dims) {
            auto [matrix, stats] = build_matrix_with_encoder(split_records, spec, dim, encoder,
                                                             cfg.tz(), build);
            const fs::path path = cfg.out_dir / features_filename(spec.name, dim);
            write_feature_matrix_csv(path, matrix, vote_split);
            manifest.record(cfg.out_dir, path);
            exclusions[spec.name + "_" + std::string(dimension_name(dim))] = {
                {"input_rows", stats.input_rows},
                {"rows_kept", stats.rows_kept},
                {"rows_dropped", stats.rows_dropped},
                {"dropped_by_missing", stats.dropped_by_missing}};
            ++files;
        }
    }
    write_text_file(cfg.out_dir / "featuresets.json", feature_sets_to_json(specs));
    write_text_file(cfg.out_dir / "featurize_summary.json", exclusions.dump(2) + "\n");
    manifest.record(cfg.out_dir, cfg.out_dir / "featuresets.json");
    manifest.record(cfg.out_dir, cfg.out_dir / "featurize_summary.json");
    manifest.record(cfg.out_dir, cfg.out_dir / "split_plan.json");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "featurize: " << files << " matrices over " << split.occupant_count()
              << " occupants (" << split.excluded_occupants.size() << " excluded)\n";
}

LoadedFeatures read_feature_matrix_csv(const fs::path& path, const std::string& spec_name,
                                       Dimension dimension) {
    const CsvFile file = read_csv(path);
    if (file.header.size() < 5 || file.header[0] != "vote_id" || file.header[2] != "split")
        throw MalformedFileError("unexpected feature matrix header in " + path.string());

    LoadedFeatures out;
    out.matrix.spec_name = spec_name;
    out.matrix.dimension = dimension;
    out.matrix.feature_names.assign(file.header.begin() + 4, file.header.end());
    for (const CsvRow& row : file.rows) {
        if (row.fields.size() != file.header.size())
            throw MalformedFileError("wrong field count at line " + std::to_string(row.line));
        out.matrix.vote_ids.push_back(row.fields[0]);
        out.matrix.occupant_ids.push_back(row.fields[1]);
        out.split.push_back(row.fields[2]);
        const auto label = parse_class(dimension, row.fields[3]);
        if (!label) throw MalformedFileError("bad label at line " + std::to_string(row.line));
        out.matrix.labels.push_back(*label);
        std::vector<double> values;
        values.reserve(out.matrix.feature_names.size());
        for (std::size_t i = 4; i < row.fields.size(); ++i) {
            const auto v = parse_strict_double(row.fields[i]);
            if (!v) throw MalformedFileError("bad value at line " + std::to_string(row.line));
            values.push_back(*v);
        }
        out.matrix.rows.push_back(std::move(values));
    }
    return out;
}

FeatureMatrix subset_rows(const FeatureMatrix& matrix, const std::vector<bool>& keep) {
    FeatureMatrix out;
    out.spec_name = matrix.spec_name;
    out.dimension = matrix.dimension;
    out.feature_names = matrix.feature_names;
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        if (!keep[i]) continue;
        out.vote_ids.push_back(matrix.vote_ids[i]);
        out.occupant_ids.push_back(matrix.occupant_ids[i]);
        out.rows.push_back(matrix.rows[i]);
        out.labels.push_back(matrix.labels[i]);
    }
    return out;
}

void stage_train(const RunConfig& cfg) {
    const auto specs = resolved_feature_sets(cfg.feature_sets);
    const auto dims = resolved_dimensions(cfg.dimensions);
    const fs::path models = cfg.out_dir / "models";
    fs::create_directories(models);

    Manifest manifest = Manifest::load(cfg.out_dir);
    json summary = json::object();
    for (const auto& spec : specs) {
        for (const Dimension dim : dims) {
            const fs::path features_path = cfg.out_dir / features_filename(spec.name, dim);
            require_artifact(features_path, "featurize");
            const LoadedFeatures loaded = read_feature_matrix_csv(features_path, spec.name, dim);
            std::vector<bool> keep(loaded.matrix.rows.size());
            for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = loaded.split[i] == "train";
            const FeatureMatrix train_matrix = subset_rows(loaded.matrix, keep);
            if (train_matrix.empty())
                throw EmptyMatrixError("no training rows for " + spec.name);

            const RandomForestModel model =
                fit_forest(train_matrix, cfg.forest, cfg.resolved_threads());
            const fs::path model_path = models / model_filename(spec.name, dim);
            save_forest(model_path, model);
            manifest.record(cfg.out_dir, model_path);
            for (const auto& warning : model.warnings)
                std::cerr << "train: warning: " << warning << "\n";
            summary[spec.name + "_" + std::string(dimension_name(dim))] = {
                {"rows", train_matrix.size()},
                {"trees", cfg.forest.n_trees},
                {"model", model_path.filename().string()}};
        }
    }
    write_text_file(cfg.out_dir / "train_summary.json", summary.dump(2) + "\n");
    manifest.record(cfg.out_dir, cfg.out_dir / "train_summary.json");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "train: " << summary.size() << " grouped forests at " << cfg.forest.n_trees
              << " trees -> " << models.string() << "\n";
}

void stage_evaluate(const RunConfig& cfg) {
    require_artifact(cfg.out_dir / "fused.csv", "fuse");
    const auto specs = resolved_feature_sets(cfg.feature_sets);
    const auto dims = resolved_dimensions(cfg.dimensions);
    for (const auto& spec : specs)
        for (const Dimension dim : dims)
            require_artifact(cfg.out_dir / features_filename(spec.name, dim), "featurize");

    const auto records = read_fused_csv(cfg.out_dir / "fused.csv");
    const SplitPlan split = temporal_split(records, cfg.min_votes);
    const auto room_clusters = fit_room_clusters(cfg, records, split);
    const EvalOptions opts = eval_options(cfg, room_clusters ? &*room_clusters : nullptr);

    json entries = json::array();
    for (const auto& spec : specs) {
        for (const Dimension dim : dims) {
            const fs::path model_path =
                cfg.out_dir / "models" / model_filename(spec.name, dim);
            require_artifact(model_path, "train");
            const RandomForestModel model = load_forest(model_path);
            const EvalReport grouped = eval_grouped(records, split, spec, dim, opts, &model);
            const EvalReport individual = eval_individual(records, split, spec, dim, opts);
            entries.push_back(json::parse(eval_report_to_json(grouped)));
            entries.push_back(json::parse(eval_report_to_json(individual)));
            std::cout << "evaluate: " << spec.name << "/" << dimension_name(dim)
                      << " grouped F1=" << grouped.f1 << " individual F1=" << individual.f1
                      << "\n";
        }
    }
    const json report{{"seed", cfg.seed},
                      {"forest",
                       {{"n_trees", cfg.forest.n_trees},
                        {"min_samples_split", cfg.forest.min_samples_split},
                        {"bootstrap", cfg.forest.bootstrap}}},
                      {"entries", entries}};
    write_text_file(cfg.out_dir / "eval_report.json", report.dump(2) + "\n");

    Manifest manifest = Manifest::load(cfg.out_dir);
    manifest.record(cfg.out_dir, cfg.out_dir / "eval_report.json");
    manifest.write(cfg.out_dir, cfg.seed);
}

void stage_coldstart(const RunConfig& cfg) {
    require_artifact(cfg.out_dir / "fused.csv", "fuse");
    const auto records = read_fused_csv(cfg.out_dir / "fused.csv");
    const SplitPlan split = temporal_split(records, cfg.min_votes);
    const auto spec = find_feature_set(cfg.coldstart_feature_set);
    if (!spec) throw ConfigError("unknown coldstart feature set: " + cfg.coldstart_feature_set);
    const EvalOptions opts = eval_options(cfg);

    std::vector<ColdStartCurve> curves;
    for (const Dimension dim : resolved_dimensions(cfg.dimensions)) {
        auto dim_curves = coldstart_curves(records, split, *spec, dim, opts, cfg.coldstart_R,
                                           cfg.seed, cfg.coldstart_max_k);
        curves.insert(curves.end(), dim_curves.begin(), dim_curves.end());
    }
    write_coldstart_csv(cfg.out_dir / "coldstart_curves.csv", curves);

    Manifest manifest = Manifest::load(cfg.out_dir);
    manifest.record(cfg.out_dir, cfg.out_dir / "coldstart_curves.csv");
    manifest.write(cfg.out_dir, cfg.seed);

    std::cout << "coldstart: " << curves.size() << " curves (R=" << cfg.coldstart_R << ", "
              << spec->name << ") -> coldstart_curves.csv\n";
}

void stage_forecast(const RunConfig& cfg) {
    require_artifact(cfg.out_dir / "fused.csv", "fuse");
    const auto records = read_fused_csv(cfg.out_dir / "fused.csv");

    std::vector<std::string> zones = cfg.forecast_zones;
    if (zones.empty()) {
        // Default: the two busiest zones (alphabetical on count ties).
        std::map<std::string, std::size_t> counts;
        for (const auto& rec : records) ++counts[rec.zone_id];
        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return std::tie(b.second, a.first) < std::tie(a.second, b.first);
        });
        for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i)
            zones.push_back(ranked[i].first);
    }

    const EvalOptions opts = eval_options(cfg);
    Manifest manifest = Manifest::load(cfg.out_dir);
    for (const std::string& zone : zones) {
        for (const Dimension dim : resolved_dimensions(cfg.dimensions)) {
            const Forecast forecast =
                zone_forecast(records, zone, dim, opts, cfg.forecast_grid_minutes);
            const fs::path path =
                cfg.out_dir /
                ("forecast_" + zone + "_" + std::string(dimension_name(dim)) + ".csv");
            write_forecast_csv(path, forecast);
            manifest.record(cfg.out_dir, path);
            std::size_t low = 0;
            for (const auto& p : forecast.points) low += p.low_confidence ? 1 : 0;
            std::cout << "forecast: " << zone << "/" << dimension_name(dim) << " "
                      << forecast.points.size() << " grid points (" << low
                      << " low-confidence)\n";
        }
    }
    manifest.write(cfg.out_dir, cfg.seed);
}

void run_pipeline(const RunConfig& cfg) {
    if (cfg.simulate_enabled) stage_simulate(cfg);
    stage_ingest(cfg);
    stage_fuse(cfg);
    stage_cluster(cfg);
    stage_featurize(cfg);
    stage_train(cfg);
    stage_evaluate(cfg);
    if (cfg.coldstart_enabled) stage_coldstart(cfg);
    stage_forecast(cfg);
}

}  // namespace comfort
