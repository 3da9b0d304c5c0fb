#include "ctxmine/lof.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ctxmine {

namespace {

double row_distance(const Eigen::MatrixXd& pts, int a, int b) {
    return (pts.row(a) - pts.row(b)).norm();
}

}  // namespace

std::vector<NeighborInfo> knn(const Eigen::MatrixXd& points, int k) {
    const int n = static_cast<int>(points.rows());
    if (k < 1 || k > n - 1) {
        throw std::invalid_argument("knn: k must be in [1, n-1], got k=" + std::to_string(k) +
                                    " with n=" + std::to_string(n));
    }
    if (!points.allFinite()) throw std::invalid_argument("knn: points must be finite");

    std::vector<NeighborInfo> out(n);
    std::vector<double> dists(n);
    std::vector<double> scratch(n);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            dists[q] = q == p ? std::numeric_limits<double>::infinity() : row_distance(points, p, q);
        }
        scratch = dists;
        std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
        const double kdist = scratch[k - 1];
        out[p].kdist = kdist;
        for (int q = 0; q < n; ++q) {
            if (q != p && dists[q] <= kdist) out[p].neighbors.push_back(q);
        }
    }
    return out;
}

LofScores lof_scores(const Eigen::MatrixXd& points, const LofConfig& cfg) {
    const std::vector<NeighborInfo> nn = knn(points, cfg.k);
    const int n = static_cast<int>(points.rows());
    const double inf = std::numeric_limits<double>::infinity();

    // lrd(p) = 1 / mean reach-dist to neighbors; reach-dist(p,o) =
    // max(kdist(o), d(p,o)). Mean of zero means exact duplicates: +inf.
    std::vector<double> lrd(n);
    for (int p = 0; p < n; ++p) {
        double sum = 0.0;
        for (int o : nn[p].neighbors) {
            sum += std::max(nn[o].kdist, row_distance(points, p, o));
        }
        const double avg = sum / static_cast<double>(nn[p].neighbors.size());
        lrd[p] = avg > 0.0 ? 1.0 / avg : inf;
    }

    LofScores result;
    result.scores.resize(n);
    result.kdist.resize(n);
    result.neighbors.resize(n);
    for (int p = 0; p < n; ++p) {
        double sum = 0.0;
        for (int o : nn[p].neighbors) {
            if (lrd[o] == inf && lrd[p] == inf) {
                sum += 1.0;  // duplicate convention
            } else {
                sum += lrd[o] / lrd[p];
            }
        }
        result.scores[p] = sum / static_cast<double>(nn[p].neighbors.size());
        result.kdist[p] = nn[p].kdist;
        result.neighbors[p] = nn[p].neighbors;
    }
    return result;
}

std::vector<int> top_outliers(const LofScores& s, std::size_t count) {
    if (count > s.scores.size()) {
        throw std::invalid_argument("top_outliers: count exceeds the number of rows");
    }
    std::vector<int> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (s.scores[a] != s.scores[b]) return s.scores[a] > s.scores[b];
        return a < b;
    });
    order.resize(count);
    return order;
}

}  // namespace ctxmine
