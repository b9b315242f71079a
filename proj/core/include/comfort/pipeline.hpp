#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comfort/eval.hpp"
#include "comfort/features.hpp"
#include "comfort/forest.hpp"
#include "comfort/ingest.hpp"
#include "comfort/synth.hpp"
#include "comfort/types.hpp"

namespace comfort {

struct InputPaths {
    std::filesystem::path votes;
    std::filesystem::path sensors;
    std::filesystem::path localization;
    std::filesystem::path wearable;
    std::filesystem::path zones;
    FileFormat format = FileFormat::Csv;
};

struct RunConfig {
    std::filesystem::path out_dir = "run";
    std::optional<InputPaths> inputs;  // unset: use <out>/raw/* from simulate
    std::string timezone = "Asia/Singapore";
    std::uint64_t seed = 0;
    int threads = 0;  // 0 => hardware concurrency

    FusionConfig fusion;
    std::optional<Instant> horizon;

    std::vector<std::string> feature_sets = {"FS1", "FS4"};
    std::vector<std::string> dimensions = {"thermal", "light", "noise"};
    bool leaky_profiles = false;
    bool room_as_cluster_label = false;

    ForestConfig forest;  // n_trees 1000 per the fixed hyperparameters

    int cluster_k = 9;  // one cluster per response class; shrinks with empty classes
    int cluster_restarts = 10;
    bool cluster_per_dimension = false;

    int min_votes = 5;

    bool coldstart_enabled = false;
    int coldstart_R = 20;
    int coldstart_max_k = 0;  // 0 => full 1..N-1
    std::string coldstart_feature_set = "FS4";

    std::vector<std::string> forecast_zones;  // empty => two busiest zones
    int forecast_grid_minutes = 30;

    bool simulate_enabled = false;
    SimConfig sim;

    int resolved_threads() const;
    Timezone tz() const { return parse_timezone(timezone); }
};

// Reads the documented JSON config; unknown keys are ignored, bad values
// throw ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json_text(const std::string& text);

// Every emitted file is listed here with its sha256; stages merge into the
// existing manifest. Content is deterministic (sorted paths, no timestamps).
class Manifest {
public:
    static Manifest load(const std::filesystem::path& out_dir);
    void record(const std::filesystem::path& out_dir, const std::filesystem::path& file);
    void write(const std::filesystem::path& out_dir, std::uint64_t seed) const;
    const std::map<std::string, std::string>& files() const { return files_; }

private:
    std::map<std::string, std::string> files_;
};

void stage_simulate(const RunConfig& cfg);
void stage_ingest(const RunConfig& cfg);
void stage_fuse(const RunConfig& cfg);
void stage_cluster(const RunConfig& cfg);
void stage_featurize(const RunConfig& cfg);
void stage_train(const RunConfig& cfg);
void stage_evaluate(const RunConfig& cfg);
void stage_coldstart(const RunConfig& cfg);
void stage_forecast(const RunConfig& cfg);

// simulate (when enabled) -> ingest -> fuse -> cluster -> featurize -> train
// -> evaluate -> coldstart (when enabled) -> forecast. Cold start is opt-in
// because its cost grows quadratically with the cohort.
void run_pipeline(const RunConfig& cfg);

// Feature CSV round-trip used by the train stage.
struct LoadedFeatures {
    FeatureMatrix matrix;
    std::vector<std::string> split;  // "train" / "test" per row
};
LoadedFeatures read_feature_matrix_csv(const std::filesystem::path& path,
                                       const std::string& spec_name, Dimension dimension);
FeatureMatrix subset_rows(const FeatureMatrix& matrix, const std::vector<bool>& keep);

}  // namespace comfort
