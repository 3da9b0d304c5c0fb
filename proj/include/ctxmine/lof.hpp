#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace ctxmine {

struct LofConfig {
    int k = 5;  // number of nearest neighbors; the metric is Euclidean
};

struct NeighborInfo {
    double kdist = 0.0;
    std::vector<int> neighbors;  // ascending row index, tie-inclusive
};

/// Per-row LOF values plus the kNN structures that produced them.
/// A row whose neighborhood is all exact duplicates gets lrd = +inf;
/// when every neighbor shares that, its score is 1 by convention.
struct LofScores {
    std::vector<double> scores;
    std::vector<double> kdist;
    std::vector<std::vector<int>> neighbors;
};

// Exact O(n^2) nearest-neighbor search over rows. kdist is the distance
// to the k-th nearest other row; the neighbor set holds every other row
// within that distance, so ties can push it past k.
std::vector<NeighborInfo> knn(const Eigen::MatrixXd& points, int k);

LofScores lof_scores(const Eigen::MatrixXd& points, const LofConfig& cfg = {});

// Row indices of the `count` largest scores, descending; ties broken by
// ascending row index.
std::vector<int> top_outliers(const LofScores& s, std::size_t count);

}  // namespace ctxmine
