#include "comfort/metrics.hpp"

#include <map>

#include "comfort/errors.hpp"

namespace comfort {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : class_labels(std::move(labels)),
      counts(class_labels.size(), std::vector<std::int64_t>(class_labels.size(), 0)) {}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.class_labels != class_labels)
        throw LengthMismatchError("cannot merge confusion matrices with different classes");
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (const auto& row : counts)
        for (const auto v : row) sum += v;
    return sum;
}

std::int64_t ConfusionMatrix::correct() const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

double f1_micro(const ConfusionMatrix& confusion) {
    const std::size_t k = confusion.counts.size();
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < k; ++c) {
        tp += confusion.counts[c][c];
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += confusion.counts[o][c];
            fn += confusion.counts[c][o];
        }
    }
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision == recall) return precision;  // single-label case: identical divisions
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double f1_micro(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
    if (y_true.size() != y_pred.size())
        throw LengthMismatchError("y_true has " + std::to_string(y_true.size()) +
                                  " entries, y_pred has " + std::to_string(y_pred.size()));
    if (y_true.empty()) throw LengthMismatchError("empty prediction set");

    std::vector<std::string> labels;
    for (int c = 0; c < n_classes; ++c) labels.push_back(std::to_string(c));
    ConfusionMatrix confusion(std::move(labels));
    for (std::size_t i = 0; i < y_true.size(); ++i) confusion.add(y_true[i], y_pred[i]);
    return f1_micro(confusion);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& confusion) {
    const std::size_t k = confusion.counts.size();
    std::vector<ClassMetrics> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t tp = confusion.counts[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += confusion.counts[o][c];
            fn += confusion.counts[c][o];
        }
        ClassMetrics& m = out[c];
        m.label = confusion.class_labels[c];
        m.support = tp + fn;
        m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw LengthMismatchError("label vectors differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;

    std::map<int, std::size_t> a_ids, b_ids;
    for (const int v : a) a_ids.emplace(v, a_ids.size());
    for (const int v : b) b_ids.emplace(v, b_ids.size());

    std::vector<std::vector<std::int64_t>> table(a_ids.size(),
                                                 std::vector<std::int64_t>(b_ids.size(), 0));
    for (std::size_t i = 0; i < n; ++i) ++table[a_ids[a[i]]][b_ids[b[i]]];

    auto choose2 = [](std::int64_t m) { return m * (m - 1) / 2; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < table[i].size(); ++j) {
            sum_ij += static_cast<double>(choose2(table[i][j]));
            row += table[i][j];
        }
        sum_a += static_cast<double>(choose2(row));
    }
    for (std::size_t j = 0; j < table[0].size(); ++j) {
        std::int64_t col = 0;
        for (std::size_t i = 0; i < table.size(); ++i) col += table[i][j];
        sum_b += static_cast<double>(choose2(col));
    }

    const double pairs = static_cast<double>(choose2(static_cast<std::int64_t>(n)));
    const double expected = sum_a * sum_b / pairs;
    const double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace comfort
