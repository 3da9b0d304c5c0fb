#include "ctxmine/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxmine {

LinearFit fit_wls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n || w.size() != n) {
        throw std::invalid_argument("fit_wls: X, y, w row counts disagree");
    }
    if (n <= p) {
        throw std::invalid_argument("fit_wls: need more observations than predictors (n=" +
                                    std::to_string(n) + ", p=" + std::to_string(p) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(w(i) > 0.0)) throw std::invalid_argument("fit_wls: weights must be positive");
    }

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = X;

    const Eigen::MatrixXd weighted = w.asDiagonal() * design;
    const Eigen::MatrixXd normal = design.transpose() * weighted;
    const Eigen::VectorXd rhs = design.transpose() * (w.cwiseProduct(y));

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(normal);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal();
    const double scale = std::max(1.0, normal.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j <= p; ++j) {
        if (std::abs(diag(j)) <= 1e-12 * scale) {
            throw std::invalid_argument(
                "fit_wls: rank-deficient design, column " + std::to_string(j) +
                " is linearly dependent (column 0 is the intercept)");
        }
    }

    LinearFit fit;
    fit.coefficients = lu.solve(rhs);
    fit.n = static_cast<int>(n);
    fit.p = static_cast<int>(p);
    fit.residuals = y - design * fit.coefficients;

    const double wsum = w.sum();
    const double ybar = w.dot(y) / wsum;
    double sst = 0.0;
    double sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = y(i) - ybar;
        sst += w(i) * d * d;
        sse += w(i) * fit.residuals(i) * fit.residuals(i);
    }
    fit.r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    if (n > p + 1) {
        fit.adjusted_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) /
                                    static_cast<double>(n - p - 1);
    }
    return fit;
}

LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return fit_wls(X, y, Eigen::VectorXd::Ones(X.rows()));
}

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X_new) {
    if (X_new.cols() != fit.p) {
        throw std::invalid_argument("predict: expected " + std::to_string(fit.p) +
                                    " predictor columns, got " + std::to_string(X_new.cols()));
    }
    return Eigen::VectorXd::Constant(X_new.rows(), fit.coefficients(0)) +
           X_new * fit.coefficients.tail(fit.p);
}

double round_medals(double yhat) { return std::max(0.0, std::round(yhat)); }

std::vector<WeightScheme> weight_scenarios() {
    std::vector<WeightScheme> schemes;
    schemes.push_back({"uniform", [](int, int) { return 1.0; }});
    schemes.push_back({"linear", [](int year, int max_year) {
                           const double den = std::max(1, max_year - 1892);
                           return std::max(static_cast<double>(year - 1892) / den, 1e-6);
                       }});
    schemes.push_back({"geometric-0.9", [](int year, int max_year) {
                           return std::pow(0.9, static_cast<double>(max_year - year) / 4.0);
                       }});
    schemes.push_back({"geometric-0.7", [](int year, int max_year) {
                           return std::pow(0.7, static_cast<double>(max_year - year) / 4.0);
                       }});
    schemes.push_back({"step-2000", [](int year, int) { return year < 2000 ? 1.0 : 3.0; }});
    // Five most recent games at 4-year spacing; epsilon elsewhere keeps
    // the weights strictly positive.
    schemes.push_back({"last-five", [](int year, int max_year) {
                           return year >= max_year - 16 ? 1.0 : 1e-6;
                       }});
    return schemes;
}

}  // namespace ctxmine
