#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ctxmine {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_leaf = 1;
    int mtry = 0;  // candidate features per split; 0 = ceil(sqrt(p))
    std::uint64_t seed = 0;
};

struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::int64_t> class_counts;  // leaves; aligned to ForestModel::classes
};

struct Tree {
    std::vector<TreeNode> nodes;  // preorder, root at 0
};

struct ForestModel {
    std::vector<int> classes;  // ascending label codes
    int n_features = 0;
    std::vector<Tree> trees;
    std::vector<std::vector<int>> oob_indices;  // per-tree out-of-bag rows; not persisted
};

// Gini-split forest over a dense feature matrix. Each tree draws its own
// bootstrap sample from an independent stream seeded with seed XOR the
// tree index, so parallel and sequential training agree.
ForestModel train_forest(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const ForestConfig& cfg = {});

// Majority vote of per-tree leaf majorities; all ties go to the smaller
// class code.
std::vector<int> predict_forest(const ForestModel& m, const Eigen::MatrixXd& X_new);

// Flat text model format: a header (tree count, feature count, classes)
// followed by each tree's nodes in preorder, one "split <feature>
// <threshold>" or "leaf <count per class>" line each. Thresholds use
// shortest round-trip decimals, so save/load/save is byte-identical.
std::string forest_to_string(const ForestModel& m);
ForestModel forest_from_string(std::string_view text);
void save_forest(const ForestModel& m, const std::string& path);
ForestModel load_forest(const std::string& path);

}  // namespace ctxmine
