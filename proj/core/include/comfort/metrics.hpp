#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace comfort {

struct ConfusionMatrix {
    std::vector<std::string> class_labels;
    std::vector<std::vector<std::int64_t>> counts;  // counts[true][pred]

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> labels);
    void add(int true_cls, int pred_cls) {
        ++counts[static_cast<std::size_t>(true_cls)][static_cast<std::size_t>(pred_cls)];
    }
    void merge(const ConfusionMatrix& other);
    std::int64_t total() const;
    std::int64_t correct() const;
};

struct ClassMetrics {
    std::string label;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::int64_t support = 0;
};

// Micro-averaged F1: TP/FP/FN summed over classes, then
// 2*precision*recall/(precision+recall). In single-label multi-class
// prediction micro precision and recall coincide, so this equals accuracy.
double f1_micro(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);
double f1_micro(const ConfusionMatrix& confusion);

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& confusion);

// Adjusted Rand index between two labelings of the same items (values are
// arbitrary ints). 1.0 for identical partitions, ~0 for random agreement.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace comfort
