#include "comfort/tendency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/rng.hpp"

namespace comfort {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;
    double inertia = 0;
    std::vector<double> trace;
    int iterations = 0;
};

LloydResult run_lloyd(const std::vector<std::vector<double>>& points, int k, Rng& rng,
                      int max_iters) {
    const std::size_t n = points.size();
    const std::size_t dims = points[0].size();

    // k-means++ seeding.
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[rng.below(n)]);
    std::vector<double> dist2(n);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            dist2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0) {
            const double target = rng.unit() * total;
            double acc = 0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);  // all points coincide with centroids
        }
        centroids.push_back(points[pick]);
    }

    std::vector<int> assign(n, -1);
    LloydResult result;
    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment step; ties go to the lower cluster index.
        bool changed = false;
        double inertia = 0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            inertia += best_d;
        }
        result.trace.push_back(inertia);
        result.iterations = iter + 1;
        if (!changed && iter > 0) break;

        // Update step.
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(dims, 0.0));
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            ++sizes[c];
            for (std::size_t d = 0; d < dims; ++d) sums[c][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            if (sizes[cu] == 0) {
                // Re-seed an empty cluster with the point farthest from its
                // centroid (lowest index on ties).
                std::size_t far = 0;
                double far_d = -1;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d =
                        sq_dist(points[i], centroids[static_cast<std::size_t>(assign[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[cu] = points[far];
                assign[far] = c;
            } else {
                for (std::size_t d = 0; d < dims; ++d)
                    centroids[cu][d] = sums[cu][d] / static_cast<double>(sizes[cu]);
            }
        }
    }

    // Final inertia against final centroids.
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i)
        inertia += sq_dist(points[i], centroids[static_cast<std::size_t>(assign[i])]);
    result.centroids = std::move(centroids);
    result.assignments = std::move(assign);
    result.inertia = inertia;
    return result;
}

}  // namespace

std::vector<TendencyVector> vote_ratios(std::span<const FusedRecord> records, SubjectKind kind) {
    std::map<std::string, TendencyVector> by_subject;
    for (const FusedRecord& rec : records) {
        const std::string& key =
            kind == SubjectKind::Occupant ? rec.vote.occupant_id : rec.zone_id;
        TendencyVector& tv = by_subject[key];
        tv.subject_id = key;
        tv.kind = kind;
        ++tv.counts[static_cast<std::size_t>(rec.vote.thermal)];
        ++tv.counts[static_cast<std::size_t>(3 + rec.vote.light)];
        ++tv.counts[static_cast<std::size_t>(6 + rec.vote.noise)];
        ++tv.vote_count;
    }

    std::vector<TendencyVector> out;
    out.reserve(by_subject.size());
    for (auto& [_, tv] : by_subject) {
        for (std::size_t i = 0; i < 9; ++i) {
            tv.ratios[i] = static_cast<double>(tv.counts[i]) / static_cast<double>(tv.vote_count);
        }
        out.push_back(std::move(tv));
    }
    return out;  // std::map iteration gives deterministic subject order
}

std::vector<TendencyVector> room_profiles(std::span<const FusedRecord> records) {
    return vote_ratios(records, SubjectKind::Room);
}

ClusterModel kmeans_fit_points(const std::vector<std::vector<double>>& points,
                               const std::vector<std::string>& point_ids,
                               const std::vector<std::string>& feature_labels, int k,
                               std::uint64_t seed, int restarts, int max_iters) {
    if (points.empty()) throw DegenerateInputError("no points to cluster");
    if (k < 1) throw DegenerateInputError("k must be >= 1");
    if (restarts < 1) restarts = 1;

    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() < static_cast<std::size_t>(k)) {
        throw DegenerateInputError("fewer distinct points (" + std::to_string(distinct.size()) +
                                   ") than k (" + std::to_string(k) + ")");
    }

    LloydResult best;
    int best_restart = -1;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        LloydResult candidate = run_lloyd(points, k, rng, max_iters);
        if (best_restart < 0 || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            best_restart = r;
        }
    }

    ClusterModel model;
    model.k = k;
    model.feature_labels = feature_labels;
    model.centroids = std::move(best.centroids);
    model.inertia = best.inertia;
    model.inertia_trace = std::move(best.trace);
    model.best_restart = best_restart;
    model.iterations = best.iterations;
    for (std::size_t i = 0; i < point_ids.size(); ++i) {
        model.assignments[point_ids[i]] = best.assignments[i];
    }
    return model;
}

namespace {

ClusterModel fit_tendency_columns(const std::vector<TendencyVector>& vectors,
                                  const std::vector<std::size_t>& columns, int k,
                                  std::uint64_t seed, int restarts) {
    if (vectors.empty()) throw DegenerateInputError("no tendency vectors");

    // Drop classes that received zero votes across all subjects.
    std::vector<std::size_t> kept;
    std::vector<std::string> dropped;
    for (std::size_t col : columns) {
        std::int64_t total = 0;
        for (const auto& tv : vectors) total += tv.counts[col];
        if (total > 0) {
            kept.push_back(col);
        } else {
            dropped.push_back(std::string(kTendencyClassLabels[col]));
        }
    }
    if (kept.empty()) throw DegenerateInputError("all response classes are empty");

    // One-cluster-per-class requests shrink with the dropped classes.
    int effective_k = k;
    if (static_cast<std::size_t>(k) == columns.size())
        effective_k = k - static_cast<int>(dropped.size());

    std::vector<std::vector<double>> points;
    std::vector<std::string> ids;
    points.reserve(vectors.size());
    for (const auto& tv : vectors) {
        std::vector<double> row;
        row.reserve(kept.size());
        for (std::size_t col : kept) row.push_back(tv.ratios[col]);
        points.push_back(std::move(row));
        ids.push_back(tv.subject_id);
    }
    std::vector<std::string> labels;
    for (std::size_t col : kept) labels.emplace_back(kTendencyClassLabels[col]);

    ClusterModel model =
        kmeans_fit_points(points, ids, labels, effective_k, seed, restarts);
    model.dropped_classes = std::move(dropped);
    return model;
}

}  // namespace

ClusterModel kmeans_fit(const std::vector<TendencyVector>& vectors, int k, std::uint64_t seed,
                        int restarts) {
    std::vector<std::size_t> all(9);
    for (std::size_t i = 0; i < 9; ++i) all[i] = i;
    return fit_tendency_columns(vectors, all, k, seed, restarts);
}

ClusterModel kmeans_fit_dimension(const std::vector<TendencyVector>& vectors, Dimension dim,
                                  int k, std::uint64_t seed, int restarts) {
    const std::size_t base = static_cast<std::size_t>(dim) * 3;
    return fit_tendency_columns(vectors, {base, base + 1, base + 2}, k, seed, restarts);
}

void write_tendencies_csv(const std::filesystem::path& path,
                          std::span<const TendencyVector> vectors) {
    CsvWriter w(path);
    std::vector<std::string> header{"subject_id", "kind"};
    for (const auto label : kTendencyClassLabels) header.push_back("ratio_" + std::string(label));
    header.push_back("vote_count");
    w.row(header);
    for (const auto& tv : vectors) {
        std::vector<std::string> row{tv.subject_id,
                                     tv.kind == SubjectKind::Occupant ? "occupant" : "room"};
        for (double ratio : tv.ratios) row.push_back(format_double(ratio));
        row.push_back(std::to_string(tv.vote_count));
        w.row(row);
    }
}

std::string cluster_model_to_json(const ClusterModel& model) {
    nlohmann::json j;
    j["k"] = model.k;
    j["feature_labels"] = model.feature_labels;
    j["centroids"] = model.centroids;
    j["assignments"] = model.assignments;
    j["inertia"] = model.inertia;
    j["dropped_classes"] = model.dropped_classes;
    j["best_restart"] = model.best_restart;
    j["iterations"] = model.iterations;
    return j.dump(2) + "\n";
}

}  // namespace comfort
