// Python bindings for the ctxmine core. Thin wrappers over the C++ API:
// matrices cross the boundary as nested lists so the module has no runtime
// dependency beyond the standard library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxmine/forest.hpp"
#include "ctxmine/impute.hpp"
#include "ctxmine/lof.hpp"
#include "ctxmine/metrics.hpp"
#include "ctxmine/pipeline.hpp"
#include "ctxmine/regression.hpp"
#include "ctxmine/sentiment.hpp"
#include "ctxmine/table.hpp"

namespace py = pybind11;
using namespace ctxmine;

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t p = n == 0 ? 0 : rows[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != p) throw std::invalid_argument("ragged matrix rows");
        for (std::size_t j = 0; j < p; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

py::dict fit_to_dict(const LinearFit& fit) {
    py::dict d;
    d["coefficients"] = from_vector(fit.coefficients);
    d["r2"] = fit.r2;
    d["adjusted_r2"] = fit.adjusted_r2 ? py::object(py::float_(*fit.adjusted_r2))
                                       : py::object(py::none());
    d["n"] = fit.n;
    d["p"] = fit.p;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "ctxmine core: imputation, outlier scoring, regression, forests, sentiment";

    py::class_<Table>(m, "Table")
        .def_static("from_csv", [](const std::string& text) { return parse_csv(text); },
                    py::arg("text"), "Parse CSV text (header row required; \"\"/NA = missing).")
        .def_static("load", [](const std::string& path) { return ingest_csv(path); },
                    py::arg("path"))
        .def("to_csv", [](const Table& t) { return to_csv(t); })
        .def_property_readonly("n_rows", &Table::row_count)
        .def_property_readonly("n_cols", &Table::col_count)
        .def("column_names",
             [](const Table& t) {
                 std::vector<std::string> names;
                 for (const auto& spec : t.schema()) names.push_back(spec.name);
                 return names;
             })
        .def("missing_counts", [](const Table& t) {
            py::dict counts;
            for (std::size_t c = 0; c < t.col_count(); ++c)
                counts[py::str(t.column(c).name)] = t.missing_in_column(c);
            return counts;
        });

    m.def("missingness",
          [](const Table& t) {
              std::vector<std::pair<std::string, std::size_t>> out;
              for (const auto& p : missingness_patterns(t).patterns) {
                  std::string mask;
                  for (bool b : p.observed) mask += b ? '1' : '0';
                  out.emplace_back(mask, p.count);
              }
              return out;
          },
          py::arg("table"), "Distinct missingness patterns as (mask, count), most common first.");

    m.def("impute",
          [](const Table& t, const std::vector<std::string>& columns, int iterations,
             int donor_pool, std::uint64_t seed, const std::string& visit_order) {
              MiceConfig cfg;
              cfg.iterations = iterations;
              cfg.donor_pool = donor_pool;
              cfg.seed = seed;
              if (visit_order == "most_missing_first")
                  cfg.visit_order = MiceConfig::VisitOrder::MostMissingFirst;
              else if (visit_order != "left_to_right")
                  throw std::invalid_argument("visit_order must be left_to_right or most_missing_first");
              MiceResult result = mice_impute(t, columns, cfg);
              return py::make_tuple(result.completed, result.imputed_cells.size());
          },
          py::arg("table"), py::arg("columns"), py::arg("iterations") = 50,
          py::arg("donor_pool") = 5, py::arg("seed") = 0,
          py::arg("visit_order") = "left_to_right",
          "MICE/PMM imputation; returns (completed table, imputed cell count).");

    m.def("lof",
          [](const std::vector<std::vector<double>>& points, int k) {
              LofConfig cfg;
              cfg.k = k;
              return lof_scores(to_matrix(points), cfg).scores;
          },
          py::arg("points"), py::arg("k") = 5, "Local outlier factor score per row.");

    m.def("wls",
          [](const std::vector<std::vector<double>>& X, const std::vector<double>& y,
             const std::vector<double>& w) {
              return fit_to_dict(fit_wls(to_matrix(X), to_vector(y), to_vector(w)));
          },
          py::arg("X"), py::arg("y"), py::arg("weights"),
          "Weighted least squares; coefficients are intercept first.");

    m.def("ols",
          [](const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
              return fit_to_dict(fit_ols(to_matrix(X), to_vector(y)));
          },
          py::arg("X"), py::arg("y"));

    m.def("train_forest",
          [](const std::vector<std::vector<double>>& X, const std::vector<int>& y, int trees,
             std::uint64_t seed, int max_depth, int min_leaf, int mtry) {
              ForestConfig cfg;
              cfg.n_trees = trees;
              cfg.seed = seed;
              cfg.max_depth = max_depth;
              cfg.min_leaf = min_leaf;
              cfg.mtry = mtry;
              return forest_to_string(train_forest(to_matrix(X), y, cfg));
          },
          py::arg("X"), py::arg("y"), py::arg("trees") = 100, py::arg("seed") = 0,
          py::arg("max_depth") = 0, py::arg("min_leaf") = 1, py::arg("mtry") = 0,
          "Train a random forest; returns the persisted model text.");

    m.def("forest_predict",
          [](const std::string& model_text, const std::vector<std::vector<double>>& X) {
              return predict_forest(forest_from_string(model_text), to_matrix(X));
          },
          py::arg("model"), py::arg("X"));

    m.def("score_text",
          [](const std::map<std::string, int>& lexicon, const std::string& text) {
              Lexicon lex;
              lex.entries = lexicon;
              return score_text(lex, text);
          },
          py::arg("lexicon"), py::arg("text"));

    m.def("team_coefficients",
          [](const std::string& corpus_tsv, const std::string& lexicon_tsv) {
              const Lexicon lex = parse_lexicon(lexicon_tsv);
              const auto tweets = parse_tweets(corpus_tsv);
              const auto scores = score_corpus(lex, tweets);
              const auto coeffs = team_coefficients(scores, tweets);
              std::map<std::string, const TeamCoefficient*> by_team;
              for (const auto& c : coeffs) by_team[c.team] = &c;
              py::list out;
              for (const auto& team : rank_teams(coeffs)) {
                  const TeamCoefficient* c = by_team.at(team);
                  py::dict d;
                  d["team"] = c->team;
                  d["atss"] = c->atss;
                  d["tweet_count"] = c->tweet_count;
                  d["score_sum"] = c->score_sum;
                  out.append(d);
              }
              return out;
          },
          py::arg("corpus_tsv"), py::arg("lexicon_tsv"),
          "ATSS per team from raw TSV text, in ranking order.");

    m.def("confusion",
          [](const std::vector<int>& actual, const std::vector<int>& predicted) {
              const ConfusionMatrix cm = confusion_matrix(predicted, actual);
              py::dict d;
              d["classes"] = cm.classes;
              d["counts"] = cm.counts;
              d["accuracy"] = accuracy(cm);
              py::list recall, precision;
              for (const auto& r : per_class_recall(cm))
                  recall.append(r ? py::object(py::float_(*r)) : py::object(py::none()));
              for (const auto& p : per_class_precision(cm))
                  precision.append(p ? py::object(py::float_(*p)) : py::object(py::none()));
              d["per_class_recall"] = recall;
              d["per_class_precision"] = precision;
              return d;
          },
          py::arg("actual"), py::arg("predicted"));

    m.def("run_pipeline",
          [](const std::string& config_json) {
              return report_to_json(run(parse_config(config_json)));
          },
          py::arg("config_json"), "Execute a pipeline config; returns the run report JSON.");
}
