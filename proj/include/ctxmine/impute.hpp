#pragma once

#include "ctxmine/table.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ctxmine {

struct MiceConfig {
    int iterations = 50;
    int donor_pool = 5;
    std::uint64_t seed = 0;
    enum class VisitOrder { LeftToRight, MostMissingFirst };
    VisitOrder visit_order = VisitOrder::LeftToRight;
    double ridge = 1e-8;  // stabilizes the normal equations (one-hot groups are collinear)
};

struct ImputedCell {
    std::size_t row = 0;
    std::string column;
    Cell value;
};

struct ChainMean {
    int iteration = 0;  // 1-based sweep
    std::string column;
    // Mean over that column's imputed cells; categorical columns report
    // the mean 0-based category index.
    double mean_imputed = 0.0;
};

struct MiceResult {
    Table completed;
    std::vector<ImputedCell> imputed_cells;  // exactly the originally MISSING cells, row-major
    std::vector<ChainMean> chain_means;
};

// Fills each MISSING cell of the listed columns with a seeded uniform draw
// from that column's observed values. Columns are processed in list order,
// rows ascending.
Table initialize_missing(const Table& t, const std::vector<std::string>& columns,
                         std::uint64_t seed);

// Predictive mean matching for one numeric column. Fits ridge-stabilized
// least squares of the observed target on the predictors, predicts every
// row, and fills each missing row with the observed value of one of the
// donor_pool observed rows whose predictions sit closest (ties to the
// lower row index; the donor among them is a seeded uniform pick). Every
// imputed value is therefore an observed value of the column.
std::vector<double> pmm_impute_variable(const Eigen::MatrixXd& predictors,
                                        const std::vector<double>& target,
                                        const std::vector<bool>& observed,
                                        int donor_pool, std::uint64_t seed, double ridge = 1e-8);

// Chained-equation imputation over the listed columns: seeded bootstrap
// fill, then cfg.iterations sweeps where each target column is re-imputed
// from the other listed columns' current values (PMM for numerics,
// nearest one-vs-rest-score donor for categoricals). Originally observed
// cells pass through untouched.
MiceResult mice_impute(const Table& t, const std::vector<std::string>& columns,
                       const MiceConfig& cfg);

}  // namespace ctxmine
