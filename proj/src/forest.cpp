#include "ctxmine/forest.hpp"

#include "ctxmine/rng.hpp"
#include "ctxmine/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ctxmine {

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t total) {
    double sumsq = 0.0;
    for (const std::int64_t c : counts) {
        const double f = static_cast<double>(c) / static_cast<double>(total);
        sumsq += f * f;
    }
    return 1.0 - sumsq;
}

class TreeGrower {
public:
    TreeGrower(const Eigen::MatrixXd& X, const std::vector<int>& labels, int n_classes, int mtry,
               int min_leaf, int max_depth, Rng& rng)
        : X_(X), labels_(labels), n_classes_(n_classes), mtry_(mtry), min_leaf_(min_leaf),
          max_depth_(max_depth), rng_(rng) {}

    Tree grow(std::vector<int> rows) {
        Tree tree;
        build(tree, std::move(rows), 0);
        return tree;
    }

private:
    int build(Tree& tree, std::vector<int> rows, int depth) {
        std::vector<std::int64_t> counts(n_classes_, 0);
        for (const int r : rows) ++counts[labels_[static_cast<std::size_t>(r)]];
        const auto total = static_cast<std::int64_t>(rows.size());

        int nonzero = 0;
        for (const std::int64_t c : counts) nonzero += c > 0 ? 1 : 0;
        const bool can_split = nonzero > 1 &&
                               total >= 2 * static_cast<std::int64_t>(min_leaf_) &&
                               (max_depth_ == 0 || depth < max_depth_);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        if (can_split) {
            find_best_split(rows, counts, total, best_feature, best_threshold, best_gain);
        }

        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (best_feature < 0) {
            TreeNode& leaf = tree.nodes[index];
            leaf.is_leaf = true;
            leaf.class_counts = std::move(counts);
            return index;
        }

        std::vector<int> left_rows;
        std::vector<int> right_rows;
        for (const int r : rows) {
            if (X_(r, best_feature) < best_threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[index].is_leaf = false;
        tree.nodes[index].feature = best_feature;
        tree.nodes[index].threshold = best_threshold;
        const int left = build(tree, std::move(left_rows), depth + 1);
        const int right = build(tree, std::move(right_rows), depth + 1);
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
        return index;
    }

    void find_best_split(const std::vector<int>& rows, const std::vector<std::int64_t>& counts,
                         std::int64_t total, int& best_feature, double& best_threshold,
                         double& best_gain) {
        const int p = static_cast<int>(X_.cols());
        std::vector<int> features(p);
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < mtry_; ++i) {
            const auto j = i + static_cast<int>(rng_.below(static_cast<std::uint64_t>(p - i)));
            std::swap(features[i], features[j]);
        }
        features.resize(mtry_);
        std::sort(features.begin(), features.end());

        const double parent = gini(counts, total);
        std::vector<int> order(rows);
        std::vector<std::int64_t> left(n_classes_);
        for (const int f : features) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = X_(a, f);
                const double vb = X_(b, f);
                if (va != vb) return va < vb;
                return a < b;
            });
            std::fill(left.begin(), left.end(), 0);
            for (std::size_t i = 1; i < order.size(); ++i) {
                ++left[labels_[static_cast<std::size_t>(order[i - 1])]];
                const double lo = X_(order[i - 1], f);
                const double hi = X_(order[i], f);
                if (lo == hi) continue;
                const auto nl = static_cast<std::int64_t>(i);
                const std::int64_t nr = total - nl;
                if (nl < min_leaf_ || nr < min_leaf_) continue;

                double gini_left = 0.0;
                double gini_right = 0.0;
                {
                    double sl = 0.0;
                    double sr = 0.0;
                    for (int c = 0; c < n_classes_; ++c) {
                        const double fl = static_cast<double>(left[c]) / static_cast<double>(nl);
                        const double fr = static_cast<double>(counts[c] - left[c]) /
                                          static_cast<double>(nr);
                        sl += fl * fl;
                        sr += fr * fr;
                    }
                    gini_left = 1.0 - sl;
                    gini_right = 1.0 - sr;
                }
                const double gain =
                    parent - (static_cast<double>(nl) * gini_left +
                              static_cast<double>(nr) * gini_right) /
                                 static_cast<double>(total);
                if (gain > best_gain) {
                    double thr = lo + (hi - lo) / 2.0;
                    if (thr <= lo) thr = hi;  // adjacent doubles
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = thr;
                }
            }
        }
    }

    const Eigen::MatrixXd& X_;
    const std::vector<int>& labels_;  // class indices, not raw codes
    int n_classes_;
    int mtry_;
    int min_leaf_;
    int max_depth_;
    Rng& rng_;
};

int leaf_majority(const TreeNode& leaf) {
    int best = 0;
    for (std::size_t c = 1; c < leaf.class_counts.size(); ++c) {
        if (leaf.class_counts[c] > leaf.class_counts[best]) best = static_cast<int>(c);
    }
    return best;
}

}  // namespace

ForestModel train_forest(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const ForestConfig& cfg) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n < 2) throw std::invalid_argument("train_forest: need at least 2 rows");
    if (static_cast<int>(y.size()) != n) throw std::invalid_argument("train_forest: label count mismatch");
    if (cfg.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");
    if (cfg.min_leaf < 1) throw std::invalid_argument("train_forest: min_leaf must be >= 1");

    ForestModel model;
    model.n_features = p;
    const std::set<int> distinct(y.begin(), y.end());
    model.classes.assign(distinct.begin(), distinct.end());

    int mtry = cfg.mtry;
    if (mtry == 0) mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
    mtry = std::max(1, mtry);
    if (mtry > p) throw std::invalid_argument("train_forest: mtry exceeds the feature count");

    std::vector<int> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), y[i]);
        labels[i] = static_cast<int>(it - model.classes.begin());
    }

    model.trees.reserve(cfg.n_trees);
    model.oob_indices.reserve(cfg.n_trees);
    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng(cfg.seed ^ static_cast<std::uint64_t>(t));
        std::vector<int> bag(n);
        std::vector<bool> drawn(n, false);
        for (int i = 0; i < n; ++i) {
            bag[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            drawn[bag[i]] = true;
        }
        std::sort(bag.begin(), bag.end());

        TreeGrower grower(X, labels, static_cast<int>(model.classes.size()), mtry, cfg.min_leaf,
                          cfg.max_depth, rng);
        model.trees.push_back(grower.grow(std::move(bag)));

        std::vector<int> oob;
        for (int i = 0; i < n; ++i) {
            if (!drawn[i]) oob.push_back(i);
        }
        model.oob_indices.push_back(std::move(oob));
    }
    return model;
}

std::vector<int> predict_forest(const ForestModel& m, const Eigen::MatrixXd& X_new) {
    if (X_new.cols() != m.n_features) {
        throw std::invalid_argument("predict_forest: expected " + std::to_string(m.n_features) +
                                    " features, got " + std::to_string(X_new.cols()));
    }
    std::vector<int> out(X_new.rows());
    std::vector<int> votes(m.classes.size());
    for (Eigen::Index r = 0; r < X_new.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const Tree& tree : m.trees) {
            int node = 0;
            while (!tree.nodes[node].is_leaf) {
                const TreeNode& nd = tree.nodes[node];
                node = X_new(r, nd.feature) < nd.threshold ? nd.left : nd.right;
            }
            ++votes[leaf_majority(tree.nodes[node])];
        }
        int best = 0;
        for (std::size_t c = 1; c < votes.size(); ++c) {
            if (votes[c] > votes[best]) best = static_cast<int>(c);
        }
        out[r] = m.classes[best];
    }
    return out;
}

std::string forest_to_string(const ForestModel& m) {
    std::string out = "ctxmine-forest v1\n";
    out += "trees " + std::to_string(m.trees.size()) + " features " +
           std::to_string(m.n_features) + "\n";
    out += "classes " + std::to_string(m.classes.size());
    for (const int c : m.classes) out += " " + std::to_string(c);
    out += "\n";
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
        const Tree& tree = m.trees[t];
        out += "tree " + std::to_string(t) + " nodes " + std::to_string(tree.nodes.size()) + "\n";
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf) {
                out += "leaf";
                for (const std::int64_t c : node.class_counts) out += " " + std::to_string(c);
                out += "\n";
            } else {
                out += "split " + std::to_string(node.feature) + " " +
                       format_double(node.threshold) + "\n";
            }
        }
    }
    return out;
}

namespace {

// Preorder reader: a split consumes its left then right subtrees.
int read_subtree(const std::vector<std::string>& lines, std::size_t& pos, std::size_t end,
                 std::size_t n_classes, Tree& tree) {
    if (pos >= end) throw std::runtime_error("forest file: truncated tree");
    std::istringstream in(lines[pos]);
    ++pos;
    std::string kind;
    in >> kind;
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (kind == "leaf") {
        TreeNode& node = tree.nodes[index];
        node.is_leaf = true;
        node.class_counts.resize(n_classes);
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (!(in >> node.class_counts[c])) {
                throw std::runtime_error("forest file: bad leaf record");
            }
        }
        return index;
    }
    if (kind != "split") throw std::runtime_error("forest file: unknown node kind '" + kind + "'");
    int feature = 0;
    std::string threshold_text;
    if (!(in >> feature >> threshold_text)) throw std::runtime_error("forest file: bad split record");
    const auto threshold = parse_double(threshold_text);
    if (!threshold) throw std::runtime_error("forest file: bad split threshold");
    tree.nodes[index].is_leaf = false;
    tree.nodes[index].feature = feature;
    tree.nodes[index].threshold = *threshold;
    const int left = read_subtree(lines, pos, end, n_classes, tree);
    const int right = read_subtree(lines, pos, end, n_classes, tree);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

}  // namespace

ForestModel forest_from_string(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    if (lines.empty() || lines[0] != "ctxmine-forest v1") {
        throw std::runtime_error("forest file: bad magic line");
    }

    ForestModel m;
    std::size_t n_trees = 0;
    {
        std::istringstream in(lines.at(1));
        std::string w1;
        std::string w2;
        if (!(in >> w1 >> n_trees >> w2 >> m.n_features) || w1 != "trees" || w2 != "features") {
            throw std::runtime_error("forest file: bad header");
        }
    }
    {
        std::istringstream in(lines.at(2));
        std::string w;
        std::size_t k = 0;
        if (!(in >> w >> k) || w != "classes") throw std::runtime_error("forest file: bad class line");
        m.classes.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            if (!(in >> m.classes[i])) throw std::runtime_error("forest file: bad class line");
        }
    }

    std::size_t pos = 3;
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::istringstream in(lines.at(pos));
        ++pos;
        std::string w1;
        std::string w2;
        std::size_t tree_index = 0;
        std::size_t node_count = 0;
        if (!(in >> w1 >> tree_index >> w2 >> node_count) || w1 != "tree" || w2 != "nodes") {
            throw std::runtime_error("forest file: bad tree header");
        }
        Tree tree;
        const std::size_t end = pos + node_count;
        read_subtree(lines, pos, end, m.classes.size(), tree);
        if (pos != end || tree.nodes.size() != node_count) {
            throw std::runtime_error("forest file: node count mismatch in tree " +
                                     std::to_string(tree_index));
        }
        m.trees.push_back(std::move(tree));
    }
    // The text format does not carry out-of-bag bookkeeping.
    return m;
}

void save_forest(const ForestModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << forest_to_string(m);
}

ForestModel load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return forest_from_string(buf.str());
}

}  // namespace ctxmine
