#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "comfort/features.hpp"

namespace comfort {

struct ForestConfig {
    int n_trees = 1000;
    int min_samples_split = 2;
    int max_features = 0;  // 0 => floor(sqrt(d)), otherwise an explicit count
    bool bootstrap = true;
    std::uint64_t master_seed = 0;
};

// 1 - sum((c_i / n)^2). Throws EmptyNodeError when all counts are zero.
double gini_impurity(std::span<const std::int64_t> class_counts);

// Nodes are stored pre-order; internal nodes carry (feature, threshold,
// children), leaves index into leaf_counts (n_classes entries each). Rows
// route left when value <= threshold.
struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 => leaf
        double threshold = 0;
        int left = -1;
        int right = -1;
        int counts_offset = -1;
    };
    std::vector<Node> nodes;
    std::vector<std::int64_t> leaf_counts;

    std::span<const std::int64_t> leaf_for(std::span<const double> row,
                                           std::size_t n_classes) const;
};

class RandomForestModel {
public:
    ForestConfig config;
    std::vector<std::string> feature_names;
    std::vector<int> classes;                // original label values, ascending
    std::vector<std::string> class_labels;   // parallel to classes
    std::vector<DecisionTree> trees;
    std::vector<std::string> warnings;

    std::size_t n_classes() const { return classes.size(); }
};

// Trains on a bootstrap resample per tree (seeded master_seed + tree index)
// with per-node uniform subsampling of max_features candidate features; splits
// minimize weighted child Gini and must strictly reduce impurity. Growth stops
// at purity or min_samples_split. Deterministic for (ordered input, config),
// independent of `threads`.
RandomForestModel fit_forest(const FeatureMatrix& matrix, const ForestConfig& cfg,
                             int threads = 1);

// predict = argmax of predict_proba (ties: first class in class order).
// Throws FeatureMismatchError if the matrix columns differ from the model's.
std::vector<int> predict(const RandomForestModel& model, const FeatureMatrix& matrix);

// Mean over trees of per-leaf class-count normalization; rows sum to 1.
std::vector<std::vector<double>> predict_proba(const RandomForestModel& model,
                                               const FeatureMatrix& matrix);
std::vector<double> predict_proba_row(const RandomForestModel& model,
                                      std::span<const double> row);

std::string forest_to_json(const RandomForestModel& model);
RandomForestModel forest_from_json(const std::string& text);
void save_forest(const std::filesystem::path& path, const RandomForestModel& model);
RandomForestModel load_forest(const std::filesystem::path& path);

}  // namespace comfort
