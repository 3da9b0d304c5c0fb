#include "ctxmine/impute.hpp"

#include "ctxmine/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ctxmine {

namespace {

// Solves (A^T A + ridge*I) beta = A^T rhs over the selected rows, where A is
// [1 | predictors]. Factors once so several right-hand sides can reuse it.
class RidgeSolver {
public:
    RidgeSolver(const Eigen::MatrixXd& predictors, const std::vector<bool>& rows, double ridge) {
        const Eigen::Index n = predictors.rows();
        const Eigen::Index q = predictors.cols() + 1;
        design_.resize(n, q);
        design_.col(0).setOnes();
        design_.rightCols(predictors.cols()) = predictors;

        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(q, q);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (rows[static_cast<std::size_t>(i)]) {
                normal.noalias() += design_.row(i).transpose() * design_.row(i);
            }
        }
        normal += ridge * Eigen::MatrixXd::Identity(q, q);

        lu_.compute(normal);
        const Eigen::VectorXd diag = lu_.matrixLU().diagonal();
        const double scale = std::max(1.0, normal.cwiseAbs().maxCoeff());
        const double tol = ridge > 0.0 ? ridge * 1e-6 : 1e-12 * scale;
        for (Eigen::Index j = 0; j < q; ++j) {
            if (std::abs(diag(j)) <= tol) {
                throw std::runtime_error("imputation regression is singular even with ridge " +
                                         std::to_string(ridge));
            }
        }
        rows_ = &rows;
    }

    // Predictions for every row from a target defined on the selected rows.
    Eigen::VectorXd predictions(const Eigen::VectorXd& target) const {
        const Eigen::Index n = design_.rows();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(design_.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((*rows_)[static_cast<std::size_t>(i)]) rhs.noalias() += design_.row(i).transpose() * target(i);
        }
        return design_ * lu_.solve(rhs);
    }

private:
    Eigen::MatrixXd design_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    const std::vector<bool>* rows_ = nullptr;
};

std::vector<std::size_t> validate_columns(const Table& t, const std::vector<std::string>& columns) {
    std::vector<std::size_t> idx;
    idx.reserve(columns.size());
    for (const auto& name : columns) {
        const std::size_t c = t.column_index(name);
        if (t.missing_in_column(c) == t.row_count()) {
            throw std::invalid_argument("column '" + name + "' has no observed cells");
        }
        idx.push_back(c);
    }
    return idx;
}

}  // namespace

Table initialize_missing(const Table& t, const std::vector<std::string>& columns,
                         std::uint64_t seed) {
    const std::vector<std::size_t> idx = validate_columns(t, columns);
    std::vector<std::vector<Cell>> rows = t.rows_copy();
    Rng rng(seed);
    for (const std::size_t c : idx) {
        std::vector<const Cell*> observed;
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            if (!t.is_missing(r, c)) observed.push_back(&t.at(r, c));
        }
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            if (t.is_missing(r, c)) rows[r][c] = *observed[rng.below(observed.size())];
        }
    }
    return Table(t.schema(), std::move(rows));
}

std::vector<double> pmm_impute_variable(const Eigen::MatrixXd& predictors,
                                        const std::vector<double>& target,
                                        const std::vector<bool>& observed,
                                        int donor_pool, std::uint64_t seed, double ridge) {
    const std::size_t n = target.size();
    if (observed.size() != n || static_cast<std::size_t>(predictors.rows()) != n) {
        throw std::invalid_argument("pmm_impute_variable: size mismatch");
    }
    if (!predictors.allFinite()) {
        throw std::invalid_argument("pmm_impute_variable: predictors must have no missing entries");
    }
    std::vector<std::size_t> obs_rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (observed[i]) obs_rows.push_back(i);
    }
    if (obs_rows.size() < 2) {
        throw std::invalid_argument("pmm_impute_variable: need at least 2 observed values");
    }
    if (donor_pool < 1 || static_cast<std::size_t>(donor_pool) > obs_rows.size()) {
        throw std::invalid_argument("pmm_impute_variable: donor pool must be in [1, #observed]");
    }

    RidgeSolver solver(predictors, observed, ridge);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (const std::size_t i : obs_rows) y(i) = target[i];
    const Eigen::VectorXd pred = solver.predictions(y);

    std::vector<double> out = target;
    Rng rng(seed);
    std::vector<std::size_t> candidates(obs_rows);
    for (std::size_t m = 0; m < n; ++m) {
        if (observed[m]) continue;
        const double pm = pred(static_cast<Eigen::Index>(m));
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            const double da = std::abs(pred(static_cast<Eigen::Index>(a)) - pm);
            const double db = std::abs(pred(static_cast<Eigen::Index>(b)) - pm);
            if (da != db) return da < db;
            return a < b;
        });
        const std::size_t donor = candidates[rng.below(static_cast<std::uint64_t>(donor_pool))];
        out[m] = target[donor];
    }
    return out;
}

MiceResult mice_impute(const Table& t, const std::vector<std::string>& columns,
                       const MiceConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("mice_impute: iterations must be >= 1");
    if (cfg.donor_pool < 1) throw std::invalid_argument("mice_impute: donor_pool must be >= 1");
    if (cfg.ridge < 0.0) throw std::invalid_argument("mice_impute: ridge must be >= 0");

    const std::vector<std::size_t> idx = validate_columns(t, columns);

    // Original missingness per listed column drives both the chain and the
    // observed-cell preservation guarantee.
    std::vector<std::vector<bool>> orig_missing(columns.size(), std::vector<bool>(t.row_count()));
    std::vector<std::size_t> missing_count(columns.size(), 0);
    for (std::size_t v = 0; v < columns.size(); ++v) {
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            const bool miss = t.is_missing(r, idx[v]);
            orig_missing[v][r] = miss;
            if (miss) ++missing_count[v];
        }
    }

    MiceResult result{t, {}, {}};
    const std::size_t total_missing =
        std::accumulate(missing_count.begin(), missing_count.end(), std::size_t{0});
    if (total_missing == 0) return result;

    std::vector<std::size_t> visit(columns.size());
    std::iota(visit.begin(), visit.end(), 0);
    if (cfg.visit_order == MiceConfig::VisitOrder::MostMissingFirst) {
        std::stable_sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) {
            return missing_count[a] > missing_count[b];
        });
    }

    std::vector<std::vector<Cell>> work =
        initialize_missing(t, columns, cfg.seed).rows_copy();

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        for (const std::size_t v : visit) {
            if (missing_count[v] == 0) continue;  // pure predictor column
            const std::size_t col = idx[v];
            const ColumnSpec& spec = t.column(col);

            std::vector<std::string> predictor_names;
            for (std::size_t u = 0; u < columns.size(); ++u) {
                if (u != v) predictor_names.push_back(columns[u]);
            }
            const Table current(t.schema(), work);
            Eigen::MatrixXd pred_matrix(t.row_count(), 0);
            if (!predictor_names.empty()) {
                pred_matrix = encode_and_scale(current, predictor_names).values;
            }

            const std::uint64_t sub_seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(iter),
                                                       static_cast<std::uint64_t>(v) + 1);
            std::vector<bool> obs(t.row_count());
            for (std::size_t r = 0; r < t.row_count(); ++r) obs[r] = !orig_missing[v][r];

            const auto n_observed =
                static_cast<int>(std::count(obs.begin(), obs.end(), true));
            const int donors = std::min(cfg.donor_pool, n_observed);

            double imputed_sum = 0.0;
            if (spec.kind == ColumnKind::Numeric) {
                std::vector<double> y(t.row_count(), 0.0);
                for (std::size_t r = 0; r < t.row_count(); ++r) {
                    y[r] = obs[r] ? t.at(r, col).number() : work[r][col].number();
                }
                const std::vector<double> filled = pmm_impute_variable(
                    pred_matrix, y, obs, donors, sub_seed, cfg.ridge);
                for (std::size_t r = 0; r < t.row_count(); ++r) {
                    if (orig_missing[v][r]) {
                        work[r][col] = Cell::number(filled[r]);
                        imputed_sum += filled[r];
                    }
                }
            } else {
                // Nearest-donor category copy: one-vs-rest least-squares
                // scores per category; the donor is the observed row whose
                // score vector is closest (ties to the lower row index).
                RidgeSolver solver(pred_matrix, obs, cfg.ridge);
                const std::size_t ncat = spec.categories.size();
                std::unordered_map<std::string, std::size_t> cat_pos;
                for (std::size_t i = 0; i < ncat; ++i) cat_pos.emplace(spec.categories[i], i);

                Eigen::MatrixXd scores(t.row_count(), ncat);
                for (std::size_t cidx = 0; cidx < ncat; ++cidx) {
                    Eigen::VectorXd indicator = Eigen::VectorXd::Zero(t.row_count());
                    for (std::size_t r = 0; r < t.row_count(); ++r) {
                        if (obs[r] && t.at(r, col).label() == spec.categories[cidx]) {
                            indicator(static_cast<Eigen::Index>(r)) = 1.0;
                        }
                    }
                    scores.col(static_cast<Eigen::Index>(cidx)) = solver.predictions(indicator);
                }

                for (std::size_t m = 0; m < t.row_count(); ++m) {
                    if (!orig_missing[v][m]) continue;
                    double best = std::numeric_limits<double>::infinity();
                    std::size_t donor = t.row_count();
                    for (std::size_t o = 0; o < t.row_count(); ++o) {
                        if (!obs[o]) continue;
                        const double d = (scores.row(static_cast<Eigen::Index>(o)) -
                                          scores.row(static_cast<Eigen::Index>(m)))
                                             .squaredNorm();
                        if (d < best) {
                            best = d;
                            donor = o;
                        }
                    }
                    const std::string& label = t.at(donor, col).label();
                    work[m][col] = Cell::category(label);
                    imputed_sum += static_cast<double>(cat_pos.at(label));
                }
            }
            result.chain_means.push_back(
                {iter, columns[v], imputed_sum / static_cast<double>(missing_count[v])});
        }
    }

    result.completed = Table(t.schema(), work);
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t v = 0; v < columns.size(); ++v) {
            if (orig_missing[v][r]) {
                result.imputed_cells.push_back({r, columns[v], result.completed.at(r, idx[v])});
            }
        }
    }
    return result;
}

}  // namespace ctxmine
