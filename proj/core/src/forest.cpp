#include "comfort/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/rng.hpp"

namespace comfort {

double gini_impurity(std::span<const std::int64_t> class_counts) {
    std::int64_t total = 0;
    for (const auto c : class_counts) total += c;
    if (total == 0) throw EmptyNodeError("gini impurity of an empty node");
    double sum_sq = 0;
    for (const auto c : class_counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::span<const std::int64_t> DecisionTree::leaf_for(std::span<const double> row,
                                                     std::size_t n_classes) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    const Node& leaf = nodes[static_cast<std::size_t>(node)];
    return {leaf_counts.data() + leaf.counts_offset, n_classes};
}

namespace {

// Column-major training view shared by all trees.
struct TrainData {
    std::vector<std::vector<double>> columns;  // d x n
    std::vector<int> labels;                   // remapped to 0..k-1
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
};

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0;
    double score = 0;  // sum_L c^2 / n_L + sum_R c^2 / n_R, larger is better
};

class TreeBuilder {
public:
    TreeBuilder(const TrainData& data, const ForestConfig& cfg, int max_features, Rng rng)
        : data_(data), cfg_(cfg), max_features_(max_features), rng_(std::move(rng)) {
        feature_pool_.resize(data.n_features);
        for (std::size_t f = 0; f < data.n_features; ++f)
            feature_pool_[f] = static_cast<int>(f);
    }

    DecisionTree build(std::vector<std::uint32_t> row_indices) {
        indices_ = std::move(row_indices);
        tree_ = DecisionTree{};
        grow(0, indices_.size());
        return std::move(tree_);
    }

private:
    // Grows the subtree over indices_[begin, end), returns its node index.
    int grow(std::size_t begin, std::size_t end) {
        std::vector<std::int64_t> counts(data_.n_classes, 0);
        for (std::size_t i = begin; i < end; ++i)
            ++counts[static_cast<std::size_t>(data_.labels[indices_[i]])];
        const std::int64_t total = static_cast<std::int64_t>(end - begin);

        std::int64_t dominant = 0;
        for (const auto c : counts) dominant = std::max(dominant, c);
        const bool pure = dominant == total;

        if (pure || total < cfg_.min_samples_split) return make_leaf(counts);

        const SplitCandidate split = best_split(begin, end, counts, total);
        if (!split.found) return make_leaf(counts);

        const auto& column = data_.columns[static_cast<std::size_t>(split.feature)];
        const auto mid = std::partition(indices_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        indices_.begin() + static_cast<std::ptrdiff_t>(end),
                                        [&](std::uint32_t row) {
                                            return column[row] <= split.threshold;
                                        });
        const std::size_t split_at = static_cast<std::size_t>(mid - indices_.begin());

        const int self = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({split.feature, split.threshold, -1, -1, -1});
        const int left = grow(begin, split_at);
        const int right = grow(split_at, end);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    int make_leaf(const std::vector<std::int64_t>& counts) {
        const int offset = static_cast<int>(tree_.leaf_counts.size());
        tree_.leaf_counts.insert(tree_.leaf_counts.end(), counts.begin(), counts.end());
        tree_.nodes.push_back({-1, 0, -1, -1, offset});
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    SplitCandidate best_split(std::size_t begin, std::size_t end,
                              const std::vector<std::int64_t>& parent_counts,
                              std::int64_t total) {
        // Uniform feature subsample without replacement (partial Fisher-Yates).
        const std::size_t m =
            std::min(static_cast<std::size_t>(max_features_), data_.n_features);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng_.below(data_.n_features - i));
            std::swap(feature_pool_[i], feature_pool_[j]);
        }

        __int128 parent_sq = 0;
        for (const auto c : parent_counts) parent_sq += static_cast<__int128>(c) * c;

        SplitCandidate best;
        std::vector<std::int64_t> left_counts(data_.n_classes);
        for (std::size_t fi = 0; fi < m; ++fi) {
            const int feature = feature_pool_[fi];
            const auto& column = data_.columns[static_cast<std::size_t>(feature)];

            scratch_.clear();
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t row = indices_[i];
                scratch_.push_back({column[row], data_.labels[row]});
            }
            std::sort(scratch_.begin(), scratch_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch_.front().first == scratch_.back().first) continue;  // constant

            std::fill(left_counts.begin(), left_counts.end(), 0);
            __int128 left_sq = 0;
            std::int64_t n_left = 0;
            for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
                const auto cls = static_cast<std::size_t>(scratch_[i].second);
                // Adding one to class cls: (c+1)^2 = c^2 + 2c + 1.
                left_sq += 2 * static_cast<__int128>(left_counts[cls]) + 1;
                ++left_counts[cls];
                ++n_left;
                if (scratch_[i].first == scratch_[i + 1].first) continue;

                const std::int64_t n_right = total - n_left;
                __int128 right_sq = 0;
                for (std::size_t c = 0; c < data_.n_classes; ++c) {
                    const std::int64_t rc = parent_counts[c] - left_counts[c];
                    right_sq += static_cast<__int128>(rc) * rc;
                }
                // Strict impurity decrease, exact in integers:
                //   sumL/nL + sumR/nR > sumP/n
                const __int128 lhs = static_cast<__int128>(total) *
                                     (left_sq * n_right + right_sq * n_left);
                const __int128 rhs =
                    parent_sq * static_cast<__int128>(n_left) * n_right;
                if (lhs <= rhs) continue;

                const double score =
                    static_cast<double>(left_sq) / static_cast<double>(n_left) +
                    static_cast<double>(right_sq) / static_cast<double>(n_right);
                double threshold =
                    scratch_[i].first + (scratch_[i + 1].first - scratch_[i].first) / 2.0;
                if (!(threshold < scratch_[i + 1].first)) threshold = scratch_[i].first;

                const bool better =
                    !best.found || score > best.score ||
                    (score == best.score &&
                     (feature < best.feature ||
                      (feature == best.feature && threshold < best.threshold)));
                if (better) {
                    best.found = true;
                    best.feature = feature;
                    best.threshold = threshold;
                    best.score = score;
                }
            }
        }
        return best;
    }

    const TrainData& data_;
    const ForestConfig& cfg_;
    int max_features_;
    Rng rng_;
    std::vector<std::uint32_t> indices_;
    std::vector<int> feature_pool_;
    std::vector<std::pair<double, int>> scratch_;
    DecisionTree tree_;
};

void check_features(const RandomForestModel& model, const FeatureMatrix& matrix) {
    if (matrix.feature_names != model.feature_names) {
        throw FeatureMismatchError("matrix features do not match model features (model: " +
                                   std::to_string(model.feature_names.size()) + " columns)");
    }
}

}  // namespace

RandomForestModel fit_forest(const FeatureMatrix& matrix, const ForestConfig& cfg, int threads) {
    if (cfg.n_trees < 1) throw InvalidConfigError("n_trees must be >= 1");
    if (cfg.min_samples_split < 2) throw InvalidConfigError("min_samples_split must be >= 2");
    if (matrix.empty()) throw EmptyMatrixError("cannot fit a forest on an empty matrix");

    TrainData data;
    data.n_rows = matrix.rows.size();
    data.n_features = matrix.feature_names.size();

    RandomForestModel model;
    model.config = cfg;
    model.feature_names = matrix.feature_names;
    for (const int label : matrix.labels) {
        if (std::find(model.classes.begin(), model.classes.end(), label) == model.classes.end())
            model.classes.push_back(label);
    }
    std::sort(model.classes.begin(), model.classes.end());
    for (const int cls : model.classes)
        model.class_labels.push_back(std::string(class_label(matrix.dimension, cls)));
    data.n_classes = model.classes.size();
    if (data.n_classes == 1) {
        model.warnings.push_back("degenerate_labels: single training class '" +
                                 model.class_labels.front() + "', constant predictor");
    }

    data.labels.resize(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const auto it =
            std::lower_bound(model.classes.begin(), model.classes.end(), matrix.labels[i]);
        data.labels[i] = static_cast<int>(it - model.classes.begin());
    }
    data.columns.assign(data.n_features, std::vector<double>(data.n_rows));
    for (std::size_t i = 0; i < data.n_rows; ++i)
        for (std::size_t f = 0; f < data.n_features; ++f)
            data.columns[f][i] = matrix.rows[i][f];

    const int max_features =
        cfg.max_features > 0
            ? std::min(cfg.max_features, static_cast<int>(data.n_features))
            : std::max(1, static_cast<int>(std::floor(
                              std::sqrt(static_cast<double>(data.n_features)))));

    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    const auto fit_tree = [&](std::size_t t) {
        Rng rng(cfg.master_seed + t);
        std::vector<std::uint32_t> rows;
        rows.reserve(data.n_rows);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < data.n_rows; ++i)
                rows.push_back(static_cast<std::uint32_t>(rng.below(data.n_rows)));
        } else {
            for (std::size_t i = 0; i < data.n_rows; ++i)
                rows.push_back(static_cast<std::uint32_t>(i));
        }
        TreeBuilder builder(data, cfg, max_features, std::move(rng));
        model.trees[t] = builder.build(std::move(rows));
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || cfg.n_trees == 1) {
        for (std::size_t t = 0; t < model.trees.size(); ++t) fit_tree(t);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= model.trees.size()) break;
                    fit_tree(t);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

std::vector<double> predict_proba_row(const RandomForestModel& model,
                                      std::span<const double> row) {
    std::vector<double> probs(model.n_classes(), 0.0);
    for (const DecisionTree& tree : model.trees) {
        const auto counts = tree.leaf_for(row, model.n_classes());
        std::int64_t total = 0;
        for (const auto c : counts) total += c;
        for (std::size_t c = 0; c < probs.size(); ++c)
            probs[c] += static_cast<double>(counts[c]) / static_cast<double>(total);
    }
    for (auto& p : probs) p /= static_cast<double>(model.trees.size());
    return probs;
}

std::vector<std::vector<double>> predict_proba(const RandomForestModel& model,
                                               const FeatureMatrix& matrix) {
    check_features(model, matrix);
    std::vector<std::vector<double>> out;
    out.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) out.push_back(predict_proba_row(model, row));
    return out;
}

std::vector<int> predict(const RandomForestModel& model, const FeatureMatrix& matrix) {
    const auto probs = predict_proba(model, matrix);
    std::vector<int> out;
    out.reserve(probs.size());
    for (const auto& p : probs) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.size(); ++c) {
            if (p[c] > p[best]) best = c;  // ties keep the earlier class
        }
        out.push_back(model.classes[best]);
    }
    return out;
}

std::string forest_to_json(const RandomForestModel& model) {
    using nlohmann::json;
    json trees = json::array();
    for (const DecisionTree& tree : model.trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) {
                nodes.push_back({node.feature, node.threshold, node.left, node.right});
            } else {
                json leaf = json::array();
                leaf.push_back(-1);
                for (std::size_t c = 0; c < model.n_classes(); ++c)
                    leaf.push_back(tree.leaf_counts[static_cast<std::size_t>(
                        node.counts_offset) + c]);
                nodes.push_back(std::move(leaf));
            }
        }
        trees.push_back(std::move(nodes));
    }
    json j{{"format", "comfort-forest"},
           {"version", 1},
           {"config",
            {{"n_trees", model.config.n_trees},
             {"min_samples_split", model.config.min_samples_split},
             {"max_features", model.config.max_features},
             {"bootstrap", model.config.bootstrap},
             {"master_seed", model.config.master_seed}}},
           {"feature_names", model.feature_names},
           {"classes", model.classes},
           {"class_labels", model.class_labels},
           {"warnings", model.warnings},
           {"trees", std::move(trees)}};
    return j.dump() + "\n";
}

RandomForestModel forest_from_json(const std::string& text) {
    using nlohmann::json;
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || j.value("format", "") != "comfort-forest" ||
        j.value("version", 0) != 1) {
        throw MalformedFileError("not a comfort-forest v1 model");
    }
    RandomForestModel model;
    const auto& cfg = j.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    model.config.max_features = cfg.at("max_features").get<int>();
    model.config.bootstrap = cfg.at("bootstrap").get<bool>();
    model.config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.classes = j.at("classes").get<std::vector<int>>();
    model.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    model.warnings = j.at("warnings").get<std::vector<std::string>>();

    const std::size_t n_classes = model.classes.size();
    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& node_json : tree_json) {
            const int head = node_json.at(0).get<int>();
            if (head >= 0) {
                tree.nodes.push_back({head, node_json.at(1).get<double>(),
                                      node_json.at(2).get<int>(), node_json.at(3).get<int>(),
                                      -1});
            } else {
                const int offset = static_cast<int>(tree.leaf_counts.size());
                for (std::size_t c = 0; c < n_classes; ++c)
                    tree.leaf_counts.push_back(node_json.at(1 + c).get<std::int64_t>());
                tree.nodes.push_back({-1, 0, -1, -1, offset});
            }
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void save_forest(const std::filesystem::path& path, const RandomForestModel& model) {
    write_text_file(path, forest_to_json(model));
}

RandomForestModel load_forest(const std::filesystem::path& path) {
    return forest_from_json(read_text_file(path));
}

}  // namespace comfort
