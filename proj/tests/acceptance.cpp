// Acceptance gate: one PASS/FAIL line per criterion, exit code = #failures.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctxmine/forest.hpp"
#include "ctxmine/impute.hpp"
#include "ctxmine/lof.hpp"
#include "ctxmine/metrics.hpp"
#include "ctxmine/pipeline.hpp"
#include "ctxmine/regression.hpp"
#include "ctxmine/rng.hpp"
#include "ctxmine/sentiment.hpp"
#include "ctxmine/table.hpp"

using namespace ctxmine;
namespace fs = std::filesystem;

namespace {

const std::string kData = CTXMINE_DATA_DIR;
int failures = 0;

void verdict(int number, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << name;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!ok) ++failures;
}

void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    verdict(number, name, ok, detail);
}

bool close_rel(double a, double b, double tol) {
    if (a == b) return true;  // covers the infinities
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ctxmine_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Independent brute-force LOF evaluation, sharing nothing with the library
// implementation beyond the published formulas and tie conventions.
struct OracleLof {
    std::vector<double> kdist;
    std::vector<std::vector<int>> neighbors;
    std::vector<double> scores;
};

OracleLof lof_oracle(const Eigen::MatrixXd& pts, int k) {
    const int n = static_cast<int>(pts.rows());
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double sq = 0.0;
            for (int c = 0; c < pts.cols(); ++c) {
                const double d = pts(i, c) - pts(j, c);
                sq += d * d;
            }
            dist[i][j] = std::sqrt(sq);
        }
    }
    OracleLof out;
    out.kdist.resize(n);
    out.neighbors.resize(n);
    for (int p = 0; p < n; ++p) {
        std::vector<double> others;
        for (int o = 0; o < n; ++o) {
            if (o != p) others.push_back(dist[p][o]);
        }
        std::sort(others.begin(), others.end());
        out.kdist[p] = others[static_cast<std::size_t>(k - 1)];
        for (int o = 0; o < n; ++o) {
            if (o != p && dist[p][o] <= out.kdist[p]) out.neighbors[p].push_back(o);
        }
    }
    std::vector<double> lrd(n);
    for (int p = 0; p < n; ++p) {
        double sum = 0.0;
        for (const int o : out.neighbors[p]) sum += std::max(out.kdist[o], dist[p][o]);
        lrd[p] = sum > 0.0 ? static_cast<double>(out.neighbors[p].size()) / sum
                           : std::numeric_limits<double>::infinity();
    }
    out.scores.resize(n);
    for (int p = 0; p < n; ++p) {
        double sum = 0.0;
        for (const int o : out.neighbors[p]) {
            if (std::isinf(lrd[o]) && std::isinf(lrd[p]))
                sum += 1.0;
            else
                sum += lrd[o] / lrd[p];
        }
        out.scores[p] = sum / static_cast<double>(out.neighbors[p].size());
    }
    return out;
}

}  // namespace

int main() {
    criterion(1, "published confusion matrix reproduces 83.96% accuracy", [](std::string& detail) {
        const std::vector<int> classes = {1, 2, 3, 4};
        const std::vector<std::vector<std::int64_t>> counts = {
            {13, 6, 6, 73}, {9, 3, 10, 61}, {5, 12, 9, 63}, {638, 634, 678, 11468}};
        std::vector<int> predicted;
        std::vector<int> actual;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                for (std::int64_t c = 0; c < counts[i][j]; ++c) {
                    predicted.push_back(classes[i]);
                    actual.push_back(classes[j]);
                }
            }
        }
        const ConfusionMatrix m = confusion_matrix(predicted, actual, classes);
        const double acc = accuracy(m);
        detail = "accuracy " + format_percent(acc);
        bool ok = std::abs(acc - 0.8396) <= 0.0001;
        const std::vector<std::int64_t> diag = {13, 3, 9, 11468};
        for (std::size_t i = 0; i < 4; ++i) ok = ok && m.counts[i][i] == diag[i];
        return ok;
    });

    criterion(2, "fixture corpus reproduces the eight ATSS values and ranking",
              [](std::string& detail) {
                  const auto start = std::chrono::steady_clock::now();
                  const Lexicon lex = load_lexicon(kData + "/lexicon_default.tsv");
                  const auto tweets = load_tweets(kData + "/uefa2013_tweets.tsv");
                  const std::vector<int> scores = score_corpus(lex, tweets);
                  const auto coeffs = team_coefficients(scores, tweets);
                  const std::vector<std::string> ranked = rank_teams(coeffs);

                  const std::vector<std::string> want_teams = {
                      "Bayern Munich", "Borussia Dortmund", "Real Madrid",
                      "Barcelona",     "Paris Saint Germain", "Juventus",
                      "Malaga",        "Galatasaray"};
                  const std::vector<double> want_atss = {36.585, 33.585, 29.542, 27.542,
                                                         27.35, 25.883, 25.542, 24.04};
                  if (ranked != want_teams) {
                      detail = "ranking mismatch";
                      return false;
                  }
                  for (std::size_t i = 0; i < ranked.size(); ++i) {
                      const auto it = std::find_if(
                          coeffs.begin(), coeffs.end(),
                          [&](const TeamCoefficient& c) { return c.team == ranked[i]; });
                      if (!close_rel(it->atss, want_atss[i], 1e-9)) {
                          detail = ranked[i] + " atss off";
                          return false;
                      }
                  }
                  const double elapsed = seconds_since(start);
                  detail = "top two are the 2013 finalists; " + std::to_string(elapsed) + " s";
                  return elapsed < 1.0;
              });

    criterion(3, "LOF matches a brute-force oracle on 20 random datasets",
              [](std::string& detail) {
                  const auto start = std::chrono::steady_clock::now();
                  Rng rng(987654321);
                  const int ks[] = {2, 5, 10};
                  for (int trial = 0; trial < 20; ++trial) {
                      const int n = 20 + static_cast<int>(rng.below(181));
                      const int dims = 1 + static_cast<int>(rng.below(10));
                      const int k = ks[trial % 3];
                      Eigen::MatrixXd pts(n, dims);
                      for (int i = 0; i < n; ++i)
                          for (int c = 0; c < dims; ++c)
                              pts(i, c) = rng.unit() * 20.0 - 10.0;
                      // plant exact duplicates to exercise the infinity path
                      pts.row(1) = pts.row(0);
                      pts.row(2) = pts.row(0);

                      LofConfig cfg;
                      cfg.k = k;
                      const LofScores got = lof_scores(pts, cfg);
                      const OracleLof want = lof_oracle(pts, k);
                      for (int p = 0; p < n; ++p) {
                          if (!close_rel(got.scores[p], want.scores[p], 1e-9)) {
                              detail = "trial " + std::to_string(trial) + " row " +
                                       std::to_string(p) + " score mismatch";
                              return false;
                          }
                          if (!close_rel(got.kdist[p], want.kdist[p], 1e-12)) {
                              detail = "trial " + std::to_string(trial) + " kdist mismatch";
                              return false;
                          }
                      }
                  }
                  const double elapsed = seconds_since(start);
                  detail = std::to_string(elapsed) + " s";
                  return elapsed < 10.0;
              });

    criterion(4, "MICE/PMM beats mean imputation and preserves observed cells",
              [](std::string& detail) {
                  const auto start = std::chrono::steady_clock::now();
                  Rng rng(20130525);
                  const std::size_t n = 500;
                  std::vector<std::vector<Cell>> rows;
                  std::vector<double> truth(n);
                  std::vector<bool> masked(n);
                  std::vector<double> observed;
                  for (std::size_t i = 0; i < n; ++i) {
                      const double x = rng.unit() * 10.0;
                      const double y = 2.0 * x + 0.1 * rng.gaussian();
                      truth[i] = y;
                      masked[i] = rng.unit() < 0.2;
                      rows.push_back({Cell::number(x),
                                      masked[i] ? Cell::missing() : Cell::number(y)});
                      if (!masked[i]) observed.push_back(y);
                  }
                  const Table t({{"x", ColumnKind::Numeric, {}}, {"y", ColumnKind::Numeric, {}}},
                                std::move(rows));

                  MiceConfig cfg;
                  cfg.seed = 77;
                  cfg.iterations = 50;
                  const MiceResult res = mice_impute(t, {"x", "y"}, cfg);

                  double mean = 0.0;
                  for (const double v : observed) mean += v;
                  mean /= static_cast<double>(observed.size());

                  double sq_mice = 0.0;
                  double sq_mean = 0.0;
                  std::size_t count = 0;
                  for (std::size_t r = 0; r < n; ++r) {
                      if (!masked[r]) continue;
                      const double yhat = res.completed.at(r, 1).number();
                      sq_mice += (yhat - truth[r]) * (yhat - truth[r]);
                      sq_mean += (mean - truth[r]) * (mean - truth[r]);
                      ++count;
                  }
                  const double rmse_mice = std::sqrt(sq_mice / static_cast<double>(count));
                  const double rmse_mean = std::sqrt(sq_mean / static_cast<double>(count));

                  bool preserved = true;
                  for (std::size_t r = 0; r < n; ++r) {
                      preserved = preserved &&
                                  res.completed.at(r, 0).number() == t.at(r, 0).number();
                      if (!masked[r])
                          preserved = preserved &&
                                      res.completed.at(r, 1).number() == t.at(r, 1).number();
                  }

                  const double elapsed = seconds_since(start);
                  detail = "rmse " + std::to_string(rmse_mice) + " vs mean baseline " +
                           std::to_string(rmse_mean) + "; " + std::to_string(elapsed) + " s";
                  return rmse_mice < rmse_mean && preserved && elapsed < 30.0;
              });

    criterion(5, "weighted least squares is exact", [](std::string& detail) {
        // uniform weights == OLS, coefficient for coefficient
        Rng rng(24680);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 10 + static_cast<int>(rng.below(40));
            const int p = 1 + static_cast<int>(rng.below(4));
            Eigen::MatrixXd X(n, p);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) {
                double lin = 0.5;
                for (int j = 0; j < p; ++j) {
                    X(i, j) = rng.unit() * 8.0 - 4.0;
                    lin += 0.3 * (j + 1) * X(i, j);
                }
                y(i) = lin + rng.gaussian();
            }
            const LinearFit wls = fit_wls(X, y, Eigen::VectorXd::Ones(n));
            const LinearFit ols = fit_ols(X, y);
            for (int j = 0; j <= p; ++j) {
                if (std::abs(wls.coefficients(j) - ols.coefficients(j)) > 1e-10) {
                    detail = "uniform-vs-OLS drift";
                    return false;
                }
            }
        }

        // hand-solved 3-point weighted example
        Eigen::MatrixXd hx(3, 1);
        hx << 0, 1, 2;
        Eigen::VectorXd hy(3);
        hy << 1, 2, 4;
        Eigen::VectorXd hw(3);
        hw << 1, 1, 4;
        const LinearFit hand = fit_wls(hx, hy, hw);
        if (std::abs(hand.coefficients(0) - 17.0 / 21.0) > 1e-10 ||
            std::abs(hand.coefficients(1) - 11.0 / 7.0) > 1e-10) {
            detail = "hand-solved example off";
            return false;
        }

        // residual orthogonality on 50 random weighted instances
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 8 + static_cast<int>(rng.below(30));
            const int p = 1 + static_cast<int>(rng.below(3));
            Eigen::MatrixXd X(n, p);
            Eigen::VectorXd y(n);
            Eigen::VectorXd w(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < p; ++j) X(i, j) = rng.unit() * 6.0 - 3.0;
                y(i) = rng.gaussian() * 2.0 + X(i, 0);
                w(i) = 0.2 + rng.unit() * 2.0;
            }
            const LinearFit fit = fit_wls(X, y, w);
            Eigen::MatrixXd design(n, p + 1);
            design.col(0).setOnes();
            design.rightCols(p) = X;
            const Eigen::VectorXd g = design.transpose() * (w.asDiagonal() * fit.residuals);
            const double scale = std::max(1.0, y.norm());
            for (int j = 0; j <= p; ++j) {
                if (std::abs(g(j)) / scale > 1e-8) {
                    detail = "orthogonality violated";
                    return false;
                }
            }
        }
        detail = "uniform==OLS @1e-10; hand example @1e-10; X'Wr=0 @1e-8 x50";
        return true;
    });

    criterion(6, "forest is deterministic and sane", [](std::string& detail) {
        Rng rng(1357);
        const std::size_t n = 200;
        Eigen::MatrixXd X(n, 2);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = rng.unit();
            const double b = rng.unit();
            X(static_cast<Eigen::Index>(i), 0) = a;
            X(static_cast<Eigen::Index>(i), 1) = b;
            y[i] = (a > 0.5) != (b > 0.5) ? 1 : 0;
        }
        ForestConfig cfg;
        cfg.n_trees = 50;
        cfg.seed = 20130525;
        const ForestModel m1 = train_forest(X, y, cfg);
        const ForestModel m2 = train_forest(X, y, cfg);
        if (forest_to_string(m1) != forest_to_string(m2)) {
            detail = "persisted models differ under one seed";
            return false;
        }

        const ForestModel constant = train_forest(X, std::vector<int>(n, 3), cfg);
        const std::vector<int> all_three = predict_forest(constant, X);
        for (const int v : all_three) {
            if (v != 3) {
                detail = "single-class forest not constant";
                return false;
            }
        }

        const std::vector<int> pred = predict_forest(m1, X);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += pred[i] == y[i] ? 1 : 0;
        const double acc = static_cast<double>(hits) / static_cast<double>(n);
        detail = "xor training accuracy " + format_percent(acc);
        return acc > 0.95;
    });

    criterion(7, "desk-scale limits stated; identities and end-to-end shape hold",
              [](std::string& detail) {
                  std::cout << "  note: the published adjusted R^2 of 0.5488, the per-sport "
                               "medal table, and the 53-column encoding depend on the authors' "
                               "Kaggle snapshots, an unstated weight scheme, and stochastic "
                               "imputation; they are not reproducible at desk scale and are "
                               "covered here by property suites instead."
                            << std::endl;

                  // adjusted-R^2 arithmetic identity on random fits
                  Rng rng(11223344);
                  for (int trial = 0; trial < 15; ++trial) {
                      const int n = 10 + static_cast<int>(rng.below(30));
                      Eigen::MatrixXd X(n, 2);
                      Eigen::VectorXd y(n);
                      for (int i = 0; i < n; ++i) {
                          X(i, 0) = rng.unit();
                          X(i, 1) = rng.gaussian();
                          y(i) = 1.0 + X(i, 0) - X(i, 1) + 0.5 * rng.gaussian();
                      }
                      const LinearFit fit = fit_ols(X, y);
                      if (!fit.adjusted_r2) {
                          detail = "adjusted r2 missing";
                          return false;
                      }
                      const double expect = 1.0 - (1.0 - fit.r2) * (fit.n - 1) /
                                                      static_cast<double>(fit.n - fit.p - 1);
                      if (std::abs(*fit.adjusted_r2 - expect) > 1e-12) {
                          detail = "adjusted r2 identity broken";
                          return false;
                      }
                  }

                  // pipeline end-to-end on the bundled medals data; emits the
                  // per-group actual-vs-predicted table and the run report
                  const fs::path out = scratch("medals_e2e");
                  PipelineConfig cfg;
                  cfg.output_dir = out.string();
                  cfg.dataset = kData + "/medals_sample.csv";
                  cfg.regress.enabled = true;
                  cfg.regress.target = "medals";
                  cfg.regress.schemes = {"uniform", "linear", "geometric-0.9"};
                  run(cfg);
                  const std::string preds = slurp(out / "predictions.csv");
                  const bool shaped =
                      preds.rfind("country,sport,scheme,actual,predicted_raw,predicted_rounded",
                                  0) == 0 &&
                      fs::exists(out / "report.json") && fs::exists(out / "medals_chart.svg");
                  if (!shaped) {
                      detail = "report shape missing";
                      return false;
                  }
                  detail = "identity x15; e2e report emitted";
                  return true;
              });

    criterion(8, "two identical runs produce identical artifact checksums",
              [](std::string& detail) {
                  PipelineConfig cfg;
                  cfg.seed = 20130525;
                  cfg.dataset = kData + "/athletes_sample.csv";
                  cfg.tweets = kData + "/sample_tweets.tsv";
                  cfg.lexicon = kData + "/lexicon_default.tsv";
                  cfg.context.push_back({kData + "/context_gdp.csv", {"year", "country"}});
                  cfg.impute.enabled = true;
                  cfg.impute.columns = {"height", "weight", "gdp_per_capita"};
                  cfg.impute.iterations = 50;
                  cfg.outliers.enabled = true;
                  cfg.outliers.columns = {"age", "height", "weight"};
                  cfg.outliers.top = 10;
                  cfg.classify.enabled = true;
                  cfg.classify.target = "medal";
                  cfg.classify.features = {"age", "height", "weight", "year"};
                  cfg.classify.trees = 50;
                  cfg.sentiment.enabled = true;

                  const fs::path a = scratch("determinism_a");
                  const fs::path b = scratch("determinism_b");
                  cfg.output_dir = a.string();
                  const RunReport ra = run(cfg);
                  cfg.output_dir = b.string();
                  const RunReport rb = run(cfg);

                  if (ra.sections.size() != rb.sections.size()) {
                      detail = "section counts differ";
                      return false;
                  }
                  std::size_t artifacts = 0;
                  for (std::size_t i = 0; i < ra.sections.size(); ++i) {
                      if (ra.sections[i].artifacts != rb.sections[i].artifacts) {
                          detail = "artifact lists differ";
                          return false;
                      }
                      for (const std::string& name : ra.sections[i].artifacts) {
                          if (fnv1a(slurp(a / name)) != fnv1a(slurp(b / name))) {
                              detail = name + " checksum differs";
                              return false;
                          }
                          ++artifacts;
                      }
                  }
                  detail = std::to_string(artifacts) +
                           " data artifacts checksummed; report.json excluded (wall-clock timings)";
                  return artifacts >= 12;
              });

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : "FAILURES: " + std::to_string(failures))
              << std::endl;
    return failures;
}
