#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "comfort/types.hpp"

namespace comfort {

enum class SubjectKind { Occupant, Room };

// Per-subject vote-ratio profile over the 9 response classes
// (kTendencyClassLabels order). Within each dimension the three ratios sum
// to 1.
struct TendencyVector {
    std::string subject_id;
    SubjectKind kind = SubjectKind::Occupant;
    std::array<double, 9> ratios{};
    std::array<std::int64_t, 9> counts{};
    std::int64_t vote_count = 0;
};

std::vector<TendencyVector> vote_ratios(std::span<const FusedRecord> records, SubjectKind kind);

// Identical math keyed by zone (SubjectKind::Room).
std::vector<TendencyVector> room_profiles(std::span<const FusedRecord> records);

struct ClusterModel {
    int k = 0;
    std::vector<std::string> feature_labels;       // columns after dropping
    std::vector<std::vector<double>> centroids;    // k x |feature_labels|
    std::map<std::string, int> assignments;        // subject_id -> cluster
    double inertia = 0;
    std::vector<std::string> dropped_classes;      // empty response classes removed
    std::vector<double> inertia_trace;             // winning restart, per Lloyd iteration
    int best_restart = 0;
    int iterations = 0;
};

// k-means++ / Lloyd over arbitrary points; best of `restarts` by inertia
// (ties: lowest restart index). Deterministic given (seed, restarts).
// Throws DegenerateInputError when there are fewer distinct points than k.
ClusterModel kmeans_fit_points(const std::vector<std::vector<double>>& points,
                               const std::vector<std::string>& point_ids,
                               const std::vector<std::string>& feature_labels, int k,
                               std::uint64_t seed, int restarts = 10, int max_iters = 300);

// Tendency clustering: response classes with zero votes across all subjects
// are dropped from the feature space first and recorded. When the requested k
// equals the full class count (one cluster per possible response), k shrinks
// by the number of dropped classes — the 9-to-8 merge when prefer_louder is
// empty.
ClusterModel kmeans_fit(const std::vector<TendencyVector>& vectors, int k, std::uint64_t seed,
                        int restarts = 10);

// Single-dimension variant over that dimension's 3 class ratios.
ClusterModel kmeans_fit_dimension(const std::vector<TendencyVector>& vectors, Dimension dim,
                                  int k, std::uint64_t seed, int restarts = 10);

void write_tendencies_csv(const std::filesystem::path& path,
                          std::span<const TendencyVector> vectors);
std::string cluster_model_to_json(const ClusterModel& model);

}  // namespace comfort
