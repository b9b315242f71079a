// comfort: staged batch pipeline for occupant comfort-preference modeling.
//
// Each subcommand reads the previous stage's artifacts from the run directory
// and writes its own, so partial reruns and external plotting stay cheap. See
// README.md for the config schema and artifact map.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "comfort/errors.hpp"
#include "comfort/pipeline.hpp"

namespace {

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> trees;
    std::vector<std::string> feature_sets;
    std::vector<std::string> dimensions;
    std::optional<std::string> votes, sensors, localization, wearable, zones_path, format;
    std::optional<int> cluster_k;
    bool cluster_per_dimension = false;
    std::optional<int> coldstart_R;
    std::optional<int> coldstart_max_k;
    std::optional<std::string> coldstart_feature_set;
    std::vector<std::string> forecast_zones;
    std::optional<int> grid_minutes;
    std::optional<int> occupants, sim_zones, days;
    std::optional<double> response_noise;
    bool synth = false;
    bool with_coldstart = false;
    bool leaky_profiles = false;
};

comfort::RunConfig build_config(const CliOverrides& o) {
    comfort::RunConfig cfg;
    if (o.config_path) cfg = comfort::load_run_config(*o.config_path);
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.sim.seed = *o.seed;
        cfg.forest.master_seed = *o.seed;
    }
    if (o.threads) cfg.threads = *o.threads;
    if (o.trees) cfg.forest.n_trees = *o.trees;
    if (!o.feature_sets.empty()) cfg.feature_sets = o.feature_sets;
    if (!o.dimensions.empty()) cfg.dimensions = o.dimensions;
    if (o.votes || o.sensors || o.localization || o.wearable || o.zones_path) {
        comfort::InputPaths inputs = cfg.inputs.value_or(comfort::InputPaths{});
        if (o.votes) inputs.votes = *o.votes;
        if (o.sensors) inputs.sensors = *o.sensors;
        if (o.localization) inputs.localization = *o.localization;
        if (o.wearable) inputs.wearable = *o.wearable;
        if (o.zones_path) inputs.zones = *o.zones_path;
        if (o.format) {
            const auto fmt = comfort::parse_file_format(*o.format);
            if (!fmt) throw comfort::ConfigError("--format must be csv or jsonl");
            inputs.format = *fmt;
        }
        cfg.inputs = inputs;
    }
    if (o.cluster_k) cfg.cluster_k = *o.cluster_k;
    if (o.cluster_per_dimension) cfg.cluster_per_dimension = true;
    if (o.coldstart_R) cfg.coldstart_R = *o.coldstart_R;
    if (o.coldstart_max_k) cfg.coldstart_max_k = *o.coldstart_max_k;
    if (o.coldstart_feature_set) cfg.coldstart_feature_set = *o.coldstart_feature_set;
    if (!o.forecast_zones.empty()) cfg.forecast_zones = o.forecast_zones;
    if (o.grid_minutes) cfg.forecast_grid_minutes = *o.grid_minutes;
    if (o.occupants) cfg.sim.n_occupants = *o.occupants;
    if (o.sim_zones) cfg.sim.n_zones = *o.sim_zones;
    if (o.days) cfg.sim.days = *o.days;
    if (o.response_noise) {
        for (auto& [archetype, _] : cfg.sim.archetype_mix)
            archetype.response_noise = *o.response_noise;
    }
    if (o.synth) cfg.simulate_enabled = true;
    if (o.with_coldstart) cfg.coldstart_enabled = true;
    if (o.leaky_profiles) cfg.leaky_profiles = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occupant comfort-preference pipeline"};
    app.require_subcommand(1);

    CliOverrides o;
    app.add_option("--config", o.config_path, "JSON run config");
    app.add_option("--out", o.out_dir, "run output directory");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--threads", o.threads, "worker threads (0 = auto)");

    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
    sim->add_option("--occupants", o.occupants);
    sim->add_option("--zones", o.sim_zones);
    sim->add_option("--days", o.days);
    sim->add_option("--noise", o.response_noise, "response noise in [0, 0.5)");

    auto* ingest = app.add_subcommand("ingest", "validate and canonicalize the raw streams");
    ingest->add_option("--votes", o.votes);
    ingest->add_option("--sensors", o.sensors);
    ingest->add_option("--localization", o.localization);
    ingest->add_option("--wearable", o.wearable);
    ingest->add_option("--zone-map", o.zones_path);
    ingest->add_option("--format", o.format, "csv or jsonl");

    app.add_subcommand("fuse", "geofence votes and join nearest sensor/wearable samples");

    auto* cluster = app.add_subcommand("cluster", "tendency vectors and k-means profiles");
    cluster->add_option("--k", o.cluster_k, "requested clusters (default: class count)");
    cluster->add_flag("--per-dimension", o.cluster_per_dimension,
                      "also cluster each dimension's 3 ratios separately");

    auto* featurize = app.add_subcommand("featurize", "build feature matrices per set/dimension");
    featurize->add_option("--feature-sets", o.feature_sets, "FS1..FS6 or all");
    featurize->add_option("--dimensions", o.dimensions);
    featurize->add_flag("--leaky-profiles", o.leaky_profiles,
                        "profiles over all data (reproduction only; leaks test labels)");

    auto* train = app.add_subcommand("train", "fit grouped forests on the training split");
    train->add_option("--trees", o.trees);
    train->add_option("--feature-sets", o.feature_sets);
    train->add_option("--dimensions", o.dimensions);

    auto* evaluate = app.add_subcommand("evaluate", "grouped and individual F1 reports");
    evaluate->add_option("--trees", o.trees);
    evaluate->add_option("--feature-sets", o.feature_sets);
    evaluate->add_option("--dimensions", o.dimensions);

    auto* coldstart = app.add_subcommand("coldstart", "crowdsourced cold-start curves");
    coldstart->add_option("--R", o.coldstart_R, "permutations per (occupant, k)");
    coldstart->add_option("--max-k", o.coldstart_max_k, "cap on source occupants (0 = all)");
    coldstart->add_option("--feature-set", o.coldstart_feature_set);
    coldstart->add_option("--trees", o.trees);
    coldstart->add_option("--dimensions", o.dimensions);

    auto* forecast = app.add_subcommand("forecast", "weekly zone forecasts with support flags");
    forecast->add_option("--zones", o.forecast_zones, "zone ids (default: two busiest)");
    forecast->add_option("--grid-minutes", o.grid_minutes);
    forecast->add_option("--trees", o.trees);
    forecast->add_option("--dimensions", o.dimensions);

    auto* pipeline = app.add_subcommand("pipeline", "run every stage in order");
    pipeline->add_flag("--synth", o.synth, "start from a simulated dataset");
    pipeline->add_flag("--with-coldstart", o.with_coldstart);
    pipeline->add_option("--trees", o.trees);
    pipeline->add_option("--feature-sets", o.feature_sets);
    pipeline->add_option("--dimensions", o.dimensions);
    pipeline->add_option("--occupants", o.occupants);
    pipeline->add_option("--days", o.days);
    pipeline->add_option("--noise", o.response_noise);

    CLI11_PARSE(app, argc, argv);

    try {
        const comfort::RunConfig cfg = build_config(o);
        if (sim->parsed()) {
            comfort::stage_simulate(cfg);
        } else if (ingest->parsed()) {
            comfort::stage_ingest(cfg);
        } else if (app.got_subcommand("fuse")) {
            comfort::stage_fuse(cfg);
        } else if (cluster->parsed()) {
            comfort::stage_cluster(cfg);
        } else if (featurize->parsed()) {
            comfort::stage_featurize(cfg);
        } else if (train->parsed()) {
            comfort::stage_train(cfg);
        } else if (evaluate->parsed()) {
            comfort::stage_evaluate(cfg);
        } else if (coldstart->parsed()) {
            comfort::stage_coldstart(cfg);
        } else if (forecast->parsed()) {
            comfort::stage_forecast(cfg);
        } else if (pipeline->parsed()) {
            comfort::run_pipeline(cfg);
        }
        return 0;
    } catch (const comfort::Error& e) {
        const nlohmann::json err{{"error", e.code()}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        const nlohmann::json err{{"error", "internal"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        return 2;
    }
}
