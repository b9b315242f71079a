#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comfort/features.hpp"
#include "comfort/forest.hpp"
#include "comfort/metrics.hpp"
#include "comfort/types.hpp"

namespace comfort {

// Per-occupant 60:40 temporal split over vote ids. Train is the first
// ceil(0.6 n) votes; no test vote precedes a train vote for that occupant.
struct SplitPlan {
    struct OccupantSplit {
        std::vector<std::string> train_ids;
        std::vector<std::string> test_ids;
    };
    std::map<std::string, OccupantSplit> by_occupant;
    std::vector<std::string> excluded_occupants;  // fewer than min_votes votes

    bool is_train(const std::string& occupant_id, const std::string& vote_id) const;
    std::size_t occupant_count() const { return by_occupant.size(); }
};

SplitPlan temporal_split(std::span<const FusedRecord> records, int min_votes = 5);

std::string split_plan_to_json(const SplitPlan& plan);

struct EvalOptions {
    ForestConfig forest;
    Timezone tz;
    int threads = 1;
    // Compute Room/History profiles over all records instead of the training
    // split. Reproduction-only: this leaks test labels into features.
    bool leaky_profiles = false;
    BuildOptions build;
    int min_votes = 5;
};

struct OccupantScore {
    double f1 = 0;
    std::int64_t test_rows = 0;
};

struct EvalReport {
    std::string feature_set;
    std::string model_kind;  // "grouped" | "individual"
    Dimension dimension = Dimension::Thermal;
    double f1 = 0;
    ConfusionMatrix confusion;
    std::vector<ClassMetrics> per_class;
    std::int64_t rows_train = 0;
    std::int64_t rows_test = 0;
    std::map<std::string, OccupantScore> per_occupant;
    std::vector<std::string> skipped_occupants;   // empty training matrix for this spec
    std::vector<std::string> excluded_occupants;  // too few votes to split
    ExclusionStats train_exclusions;
    ExclusionStats test_exclusions;
};

// One forest over the union of all occupants' training rows, tested on the
// union of test rows. Pass `prefit` to evaluate a previously trained model.
EvalReport eval_grouped(std::span<const FusedRecord> records, const SplitPlan& split,
                        const FeatureSetSpec& spec, Dimension dimension,
                        const EvalOptions& opts,
                        const RandomForestModel* prefit = nullptr);

// One forest per occupant, trained and profiled on that occupant's own
// training rows only; micro counts aggregate across occupants.
EvalReport eval_individual(std::span<const FusedRecord> records, const SplitPlan& split,
                           const FeatureSetSpec& spec, Dimension dimension,
                           const EvalOptions& opts);

// Trains the grouped forest without evaluating (the `train` stage artifact).
RandomForestModel train_grouped(std::span<const FusedRecord> records, const SplitPlan& split,
                                const FeatureSetSpec& spec, Dimension dimension,
                                const EvalOptions& opts);

struct ColdStartPoint {
    int k = 0;
    double f1_excluded = 0;
    double f1_included = 0;
};

struct ColdStartCurve {
    std::string occupant_id;
    Dimension dimension = Dimension::Thermal;
    std::vector<ColdStartPoint> points;  // k = 1 .. N-1
};

// For each target occupant u and k: R random k-subsets of the other
// occupants; the excluded curve trains on the subset's training rows only
// (u's History encodes as cold-start zeros), the included curve adds u's
// training rows; both test on u's test rows, F1 averaged over the same R
// draws. max_k = 0 means the full range 1..N-1.
std::vector<ColdStartCurve> coldstart_curves(std::span<const FusedRecord> records,
                                             const SplitPlan& split, const FeatureSetSpec& spec,
                                             Dimension dimension, const EvalOptions& opts,
                                             int R, std::uint64_t seed, int max_k = 0);

struct ForecastPoint {
    Instant timestamp;
    int day_of_week = 0;       // Monday = 0, local
    double hour_local = 0;     // fractional local hour
    std::vector<double> probs; // over the dimension's 3 canonical classes
    std::int64_t support = 0;  // votes within +-1 h time-of-day, same weekday
    bool low_confidence = false;  // support == 0
};

struct Forecast {
    std::string zone_id;
    Dimension dimension = Dimension::Thermal;
    std::vector<std::string> class_labels;
    std::vector<ForecastPoint> points;
};

// Time-feature forest over one zone's records, evaluated on a regular grid
// across a canonical Monday-Sunday week. Grid points with no historical vote
// within +-1 h of that time-of-day/weekday are flagged low-confidence.
Forecast zone_forecast(std::span<const FusedRecord> records, const std::string& zone_id,
                       Dimension dimension, const EvalOptions& opts, int grid_minutes = 30);

std::string eval_report_to_json(const EvalReport& report);
void write_coldstart_csv(const std::filesystem::path& path,
                         std::span<const ColdStartCurve> curves);
void write_forecast_csv(const std::filesystem::path& path, const Forecast& forecast);

}  // namespace comfort
