#include <doctest.h>

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ctxmine/forest.hpp"
#include "ctxmine/rng.hpp"

using namespace ctxmine;

namespace {

struct Dataset {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

// label = (x0 > .5) xor (x1 > .5): linearly inseparable but tree friendly.
Dataset make_xor(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(n), 2);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.unit();
        const double b = rng.unit();
        d.X(static_cast<Eigen::Index>(i), 0) = a;
        d.X(static_cast<Eigen::Index>(i), 1) = b;
        d.y[i] = (a > 0.5) != (b > 0.5) ? 1 : 0;
    }
    return d;
}

double training_accuracy(const ForestModel& m, const Dataset& d) {
    const std::vector<int> pred = predict_forest(m, d.X);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i) hits += pred[i] == d.y[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(d.y.size());
}

Tree single_leaf(std::vector<std::int64_t> counts) {
    Tree t;
    TreeNode leaf;
    leaf.is_leaf = true;
    leaf.class_counts = std::move(counts);
    t.nodes.push_back(leaf);
    return t;
}

}  // namespace

TEST_CASE("single-class training yields a constant predictor") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 3, 4, 5, 6, 7, 8;
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.seed = 1;
    const ForestModel m = train_forest(X, {7, 7, 7, 7}, cfg);
    CHECK(m.classes == std::vector<int>{7});
    Eigen::MatrixXd probe(2, 2);
    probe << -100, -100, 100, 100;
    CHECK(predict_forest(m, probe) == std::vector<int>{7, 7});
}

TEST_CASE("same seed trains a byte-identical forest") {
    const Dataset d = make_xor(150, 11);
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 777;
    const ForestModel a = train_forest(d.X, d.y, cfg);
    const ForestModel b = train_forest(d.X, d.y, cfg);
    CHECK(forest_to_string(a) == forest_to_string(b));
    CHECK(predict_forest(a, d.X) == predict_forest(b, d.X));
}

TEST_CASE("xor is learned to high training accuracy") {
    const Dataset d = make_xor(200, 42);
    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 20130525;
    const ForestModel m = train_forest(d.X, d.y, cfg);
    CHECK(training_accuracy(m, d) > 0.95);
}

TEST_CASE("hand-built single tree routes on the split threshold") {
    ForestModel m;
    m.classes = {0, 1};
    m.n_features = 1;
    Tree t;
    TreeNode root;
    root.is_leaf = false;
    root.feature = 0;
    root.threshold = 0.5;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    TreeNode left;
    left.is_leaf = true;
    left.class_counts = {3, 0};
    t.nodes.push_back(left);
    TreeNode right;
    right.is_leaf = true;
    right.class_counts = {0, 3};
    t.nodes.push_back(right);
    m.trees.push_back(t);

    Eigen::MatrixXd probe(3, 1);
    probe << 0.4, 0.5, 0.6;  // threshold itself goes right (x < thr is left)
    CHECK(predict_forest(m, probe) == std::vector<int>{0, 1, 1});
}

TEST_CASE("split vote ties resolve to the smaller class code") {
    ForestModel m;
    m.classes = {1, 4};
    m.n_features = 1;
    m.trees.push_back(single_leaf({5, 0}));  // votes class code 1
    m.trees.push_back(single_leaf({0, 5}));  // votes class code 4
    Eigen::MatrixXd probe(1, 1);
    probe << 0.0;
    CHECK(predict_forest(m, probe) == std::vector<int>{1});

    // Same rule inside a leaf: equal counts pick the smaller code.
    ForestModel tied;
    tied.classes = {2, 9};
    tied.n_features = 1;
    tied.trees.push_back(single_leaf({3, 3}));
    CHECK(predict_forest(tied, probe) == std::vector<int>{2});
}

TEST_CASE("out-of-bag fraction sits near 1/e for large n") {
    const Dataset d = make_xor(1000, 5);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 99;
    const ForestModel m = train_forest(d.X, d.y, cfg);
    REQUIRE(m.oob_indices.size() == 20);
    for (const auto& oob : m.oob_indices) {
        const double frac = static_cast<double>(oob.size()) / 1000.0;
        CHECK(frac >= 0.25);
        CHECK(frac <= 0.50);
        // strictly increasing row ids, in range
        for (std::size_t i = 0; i < oob.size(); ++i) {
            CHECK(oob[i] >= 0);
            CHECK(oob[i] < 1000);
            if (i > 0) CHECK(oob[i] > oob[i - 1]);
        }
    }
}

TEST_CASE("every tree accounts for exactly one bootstrap bag") {
    // Each bag has n entries (with multiplicity) and every entry lands in
    // exactly one leaf, so leaf counts across a tree sum to n.
    const Dataset d = make_xor(128, 3);
    ForestConfig cfg;
    cfg.n_trees = 8;
    cfg.seed = 31;
    const ForestModel m = train_forest(d.X, d.y, cfg);
    for (const Tree& tree : m.trees) {
        std::int64_t total = 0;
        for (const TreeNode& node : tree.nodes) {
            if (!node.is_leaf) {
                CHECK(node.feature >= 0);
                CHECK(node.feature < 2);
                CHECK(node.left > 0);
                CHECK(node.right > 0);
                continue;
            }
            REQUIRE(node.class_counts.size() == m.classes.size());
            for (const std::int64_t c : node.class_counts) total += c;
        }
        CHECK(total == 128);
    }
}

TEST_CASE("model text round-trips byte-for-byte") {
    const Dataset d = make_xor(100, 17);
    ForestConfig cfg;
    cfg.n_trees = 7;
    cfg.seed = 4242;
    const ForestModel m = train_forest(d.X, d.y, cfg);

    const std::string text = forest_to_string(m);
    CHECK(text.rfind("ctxmine-forest v1\n", 0) == 0);
    const ForestModel back = forest_from_string(text);
    CHECK(forest_to_string(back) == text);
    CHECK(predict_forest(back, d.X) == predict_forest(m, d.X));
    CHECK(back.oob_indices.empty());  // diagnostics are not persisted

    const std::string path =
        (std::filesystem::temp_directory_path() / "ctxmine_forest_roundtrip.txt").string();
    save_forest(m, path);
    const ForestModel loaded = load_forest(path);
    CHECK(forest_to_string(loaded) == text);
    std::remove(path.c_str());
}

TEST_CASE("malformed model text is rejected") {
    CHECK_THROWS(forest_from_string(""));
    CHECK_THROWS(forest_from_string("not-a-forest v9\n"));

    const Dataset d = make_xor(60, 23);
    ForestConfig cfg;
    cfg.n_trees = 2;
    cfg.seed = 8;
    std::string text = forest_to_string(train_forest(d.X, d.y, cfg));

    // Truncating mid-tree must fail loudly, not parse a partial model.
    CHECK_THROWS(forest_from_string(text.substr(0, text.size() / 2)));

    std::string corrupted = text;
    const std::size_t at = corrupted.find("leaf");
    if (at != std::string::npos) corrupted.replace(at, 4, "loaf");
    CHECK_THROWS(forest_from_string(corrupted));
}

TEST_CASE("training and prediction validation") {
    Eigen::MatrixXd X(4, 3);
    X.setZero();
    const std::vector<int> y = {0, 1, 0, 1};

    ForestConfig cfg;
    cfg.n_trees = 0;
    CHECK_THROWS_AS(train_forest(X, y, cfg), std::invalid_argument);
    cfg.n_trees = 1;
    cfg.min_leaf = 0;
    CHECK_THROWS_AS(train_forest(X, y, cfg), std::invalid_argument);
    cfg.min_leaf = 1;
    cfg.mtry = 4;
    CHECK_THROWS_AS(train_forest(X, y, cfg), std::invalid_argument);  // mtry > p
    cfg.mtry = 0;
    CHECK_THROWS_AS(train_forest(X, {0, 1}, cfg), std::invalid_argument);  // label mismatch
    CHECK_THROWS_AS(train_forest(Eigen::MatrixXd::Zero(1, 2), {0}, cfg),
                    std::invalid_argument);  // n < 2

    const ForestModel m = train_forest(X, y, cfg);
    CHECK_THROWS_AS(predict_forest(m, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("max_depth and min_leaf rein in tree growth") {
    const Dataset d = make_xor(300, 7);
    ForestConfig stump;
    stump.n_trees = 10;
    stump.seed = 2;
    stump.max_depth = 1;
    const ForestModel m = train_forest(d.X, d.y, stump);
    for (const Tree& tree : m.trees) CHECK(tree.nodes.size() <= 3);

    ForestConfig chunky;
    chunky.n_trees = 10;
    chunky.seed = 2;
    chunky.min_leaf = 50;
    const ForestModel big_leaves = train_forest(d.X, d.y, chunky);
    for (const Tree& tree : big_leaves.trees) {
        for (const TreeNode& node : tree.nodes) {
            if (!node.is_leaf) continue;
            std::int64_t total = 0;
            for (const std::int64_t c : node.class_counts) total += c;
            CHECK(total >= 50);
        }
    }
}
