#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "ctxmine/regression.hpp"
#include "ctxmine/rng.hpp"

using namespace ctxmine;

namespace {

Eigen::MatrixXd col(const std::vector<double>& xs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
    return m;
}

Eigen::VectorXd vec(const std::vector<double>& xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v(static_cast<Eigen::Index>(i)) = xs[i];
    return v;
}

// A deterministic random fit instance for the property checks.
struct Instance {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd w;
};

Instance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 10 + static_cast<int>(rng.below(40));
    const int p = 1 + static_cast<int>(rng.below(4));
    Instance inst;
    inst.X.resize(n, p);
    inst.y.resize(n);
    inst.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double lin = 1.5;
        for (int j = 0; j < p; ++j) {
            inst.X(i, j) = rng.unit() * 10.0 - 5.0;
            lin += (j + 1) * 0.7 * inst.X(i, j);
        }
        inst.y(i) = lin + rng.gaussian();
        inst.w(i) = 0.1 + rng.unit() * 3.0;
    }
    return inst;
}

}  // namespace

TEST_CASE("perfect line fits exactly") {
    const LinearFit fit = fit_wls(col({0, 1, 2}), vec({0, 1, 2}), vec({1, 1, 1}));
    CHECK(fit.coefficients(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.coefficients(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform weights reproduce OLS coefficient-for-coefficient") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const Instance inst = random_instance(seed);
        const LinearFit wls =
            fit_wls(inst.X, inst.y, Eigen::VectorXd::Ones(inst.X.rows()));
        const LinearFit ols = fit_ols(inst.X, inst.y);
        REQUIRE(wls.coefficients.size() == ols.coefficients.size());
        for (int j = 0; j < wls.coefficients.size(); ++j)
            CHECK(std::abs(wls.coefficients(j) - ols.coefficients(j)) < 1e-10);
        CHECK(wls.r2 == doctest::Approx(ols.r2).epsilon(1e-10));
    }
}

TEST_CASE("hand-solved weighted normal equations: y={1,2,4}, w={1,1,4}") {
    // Sums: Sw=6, Swx=9, Swx2=17, Swy=19, Swxy=34.
    // [[6,9],[9,17]] b = [19,34]  =>  b0 = 17/21, b1 = 11/7.
    const LinearFit fit = fit_wls(col({0, 1, 2}), vec({1, 2, 4}), vec({1, 1, 4}));
    CHECK(std::abs(fit.coefficients(0) - 17.0 / 21.0) < 1e-10);
    CHECK(std::abs(fit.coefficients(1) - 11.0 / 7.0) < 1e-10);
}

TEST_CASE("hand-solved weighted fit with r2: y={0,1,4}, w={1,2,1}") {
    // Normal equations [[4,4],[4,6]] b = [6,10] => b = (-0.5, 2).
    // Weighted mean 1.5, SST = 9, SSE = 1 => r2 = 8/9, adjusted = 7/9.
    const LinearFit fit = fit_wls(col({0, 1, 2}), vec({0, 1, 4}), vec({1, 2, 1}));
    CHECK(std::abs(fit.coefficients(0) + 0.5) < 1e-10);
    CHECK(std::abs(fit.coefficients(1) - 2.0) < 1e-10);
    CHECK(fit.r2 == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    REQUIRE(fit.adjusted_r2.has_value());
    CHECK(*fit.adjusted_r2 == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("constant response gives zero slope and zero r2") {
    const LinearFit fit = fit_ols(col({0, 1, 2, 3}), vec({5, 5, 5, 5}));
    CHECK(fit.coefficients(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.r2 == 0.0);
}

TEST_CASE("column permutation permutes coefficients consistently") {
    const Instance inst = random_instance(99);
    const LinearFit base = fit_ols(inst.X, inst.y);
    Eigen::MatrixXd swapped = inst.X;
    if (swapped.cols() >= 2) {
        swapped.col(0).swap(swapped.col(1));
        const LinearFit moved = fit_ols(swapped, inst.y);
        CHECK(moved.coefficients(0) == doctest::Approx(base.coefficients(0)).epsilon(1e-9));
        CHECK(moved.coefficients(1) == doctest::Approx(base.coefficients(2)).epsilon(1e-9));
        CHECK(moved.coefficients(2) == doctest::Approx(base.coefficients(1)).epsilon(1e-9));
    }
}

TEST_CASE("exact interpolation at n = p+1 has r2 = 1 and no adjusted r2") {
    const LinearFit fit = fit_ols(col({0, 1}), vec({3, 7}));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(fit.adjusted_r2.has_value());  // undefined sentinel, never NaN
}

TEST_CASE("predict basics and the medal rounding rule") {
    LinearFit ident;
    ident.coefficients = vec({0, 1});
    ident.p = 1;
    CHECK(predict(ident, col({5}))(0) == doctest::Approx(5.0));
    LinearFit constant;
    constant.coefficients = vec({2, 0});
    constant.p = 1;
    CHECK(predict(constant, col({123}))(0) == doctest::Approx(2.0));
    CHECK(round_medals(6.6) == 7.0);
    CHECK(round_medals(6.4) == 6.0);
    CHECK(round_medals(-0.7) == 0.0);  // never negative in report tables

    CHECK_THROWS_AS(predict(ident, Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("the six recency-weight scenarios") {
    const auto schemes = weight_scenarios();
    REQUIRE(schemes.size() == 6);

    const auto find = [&](const std::string& name) -> const WeightScheme& {
        for (const auto& s : schemes)
            if (s.name == name) return s;
        REQUIRE(false);
        return schemes[0];
    };

    CHECK(find("uniform").weight(1896, 2016) == 1.0);
    CHECK(find("uniform").weight(2016, 2016) == 1.0);
    CHECK(find("linear").weight(2016, 2016) > find("linear").weight(1896, 2016));
    CHECK(find("linear").weight(1896, 2016) > 0.0);
    CHECK(find("geometric-0.9").weight(2012, 2016) == doctest::Approx(0.9).epsilon(1e-12));

    // Every scheme: strictly positive and non-decreasing in year.
    for (const auto& s : schemes) {
        double prev = 0.0;
        for (int year = 1896; year <= 2016; year += 4) {
            const double w = s.weight(year, 2016);
            CHECK(w > 0.0);
            CHECK(w >= prev);
            prev = w;
        }
    }
}

TEST_CASE("residual orthogonality holds on 50 random instances") {
    for (std::uint64_t seed = 100; seed < 150; ++seed) {
        const Instance inst = random_instance(seed);
        const LinearFit fit = fit_wls(inst.X, inst.y, inst.w);
        Eigen::MatrixXd design(inst.X.rows(), inst.X.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(inst.X.cols()) = inst.X;
        const Eigen::VectorXd g = design.transpose() * (inst.w.asDiagonal() * fit.residuals);
        const double scale = std::max(1.0, inst.y.norm());
        for (int j = 0; j < g.size(); ++j) CHECK(std::abs(g(j)) / scale < 1e-8);
        CHECK(fit.r2 <= 1.0);
    }
}

TEST_CASE("adjusted r2 identity is exact arithmetic") {
    for (std::uint64_t seed = 200; seed < 215; ++seed) {
        const Instance inst = random_instance(seed);
        const LinearFit fit = fit_wls(inst.X, inst.y, inst.w);
        REQUIRE(fit.adjusted_r2.has_value());
        const double expect =
            1.0 - (1.0 - fit.r2) * (fit.n - 1) / static_cast<double>(fit.n - fit.p - 1);
        CHECK(*fit.adjusted_r2 == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("scaling a predictor rescales its coefficient and keeps predictions") {
    const Instance inst = random_instance(321);
    const LinearFit base = fit_wls(inst.X, inst.y, inst.w);
    Eigen::MatrixXd scaled = inst.X;
    const double c = 40.0;
    scaled.col(0) *= c;
    const LinearFit moved = fit_wls(scaled, inst.y, inst.w);
    CHECK(moved.coefficients(1) == doctest::Approx(base.coefficients(1) / c).epsilon(1e-9));
    const Eigen::VectorXd p0 = predict(base, inst.X);
    const Eigen::VectorXd p1 = predict(moved, scaled);
    for (int i = 0; i < p0.size(); ++i)
        CHECK(p1(i) == doctest::Approx(p0(i)).epsilon(1e-9));
}

TEST_CASE("rank-deficient designs raise an error naming a column") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 2, 4, 3, 6, 4, 8;  // second column = 2 * first
    try {
        fit_ols(X, vec({1, 2, 3, 4}));
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(fit_wls(col({1, 2}), vec({1, 2}), vec({1, -1})), std::invalid_argument);
    CHECK_THROWS_AS(fit_wls(col({1, 2}), vec({1}), vec({1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(fit_ols(col({1}), vec({1})), std::invalid_argument);  // n <= p
}
