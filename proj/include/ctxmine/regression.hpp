#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctxmine {

/// A recency-emphasis weighting: strictly positive, non-decreasing in year.
struct WeightScheme {
    std::string name;
    std::function<double(int year, int max_year)> weight;
};

struct LinearFit {
    Eigen::VectorXd coefficients;  // intercept first, then one per predictor
    double r2 = 0.0;
    std::optional<double> adjusted_r2;  // empty when n <= p+1
    int n = 0;                          // observations
    int p = 0;                          // predictors, excluding intercept
    Eigen::VectorXd residuals;
};

// Weighted least squares through the normal equations (ridge-free,
// partial-pivot LU). X holds the predictors only; the intercept column is
// added internally. r2 uses the weighted sums of squares around the
// weighted mean; constant-response fits report r2 = 0.
LinearFit fit_wls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X_new);

// Nearest nonnegative integer, for medal-count report tables.
double round_medals(double yhat);

// The six named recency-weight scenarios.
std::vector<WeightScheme> weight_scenarios();

}  // namespace ctxmine
