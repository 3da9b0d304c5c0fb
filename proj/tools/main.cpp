// ctxmine: statistical lifecycle toolkit CLI.
//
// Every subcommand accepts --config (JSON pipeline config), --seed and
// --out; flags override config file values. Single-step subcommands run the
// pipeline with exactly that step enabled, so their artifacts match what a
// full `run` would produce for the same settings.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctxmine/metrics.hpp"
#include "ctxmine/pipeline.hpp"
#include "ctxmine/table.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "JSON pipeline configuration file");
    opts.seed_opt = sub->add_option("--seed", opts.seed, "random seed (overrides config)");
    opts.out_opt = sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
}

ctxmine::PipelineConfig base_config(const CommonOpts& opts) {
    ctxmine::PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = ctxmine::load_config(opts.config_path);
    if (opts.seed_opt->count() > 0) cfg.seed = opts.seed;
    if (opts.out_opt->count() > 0) cfg.output_dir = opts.out_dir;
    return cfg;
}

void disable_all_steps(ctxmine::PipelineConfig& cfg) {
    cfg.impute.enabled = false;
    cfg.outliers.enabled = false;
    cfg.regress.enabled = false;
    cfg.classify.enabled = false;
    cfg.sentiment.enabled = false;
}

void print_report(const ctxmine::RunReport& report) {
    for (const auto& s : report.sections) {
        std::printf("step %-9s %6zu -> %-6zu rows  %8.3fs  ", s.step.c_str(), s.rows_in,
                    s.rows_out, s.seconds);
        for (std::size_t i = 0; i < s.artifacts.size(); ++i)
            std::printf("%s%s", i ? ", " : "", s.artifacts[i].c_str());
        std::printf("\n");
    }
    std::printf("artifacts in %s\n", report.output_dir.c_str());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_artifact(const ctxmine::RunReport& report, const std::string& name) {
    std::cout << read_file(report.output_dir + "/" + name);
}

int run_pipeline(const ctxmine::PipelineConfig& cfg) {
    const ctxmine::RunReport report = ctxmine::run(cfg);
    print_report(report);
    return 0;
}

// `evaluate`: confusion-matrix metrics from a predictions CSV with
// `actual` and `predicted` columns (as written by `classify`).
int evaluate_predictions(const std::string& predictions_path, const std::string& out_dir) {
    const ctxmine::Table t = ctxmine::ingest_csv(predictions_path);
    const std::size_t actual_col = t.column_index("actual");
    const std::size_t predicted_col = t.column_index("predicted");
    std::vector<int> actual, predicted;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        actual.push_back(static_cast<int>(t.at(r, actual_col).number()));
        predicted.push_back(static_cast<int>(t.at(r, predicted_col).number()));
    }
    const ctxmine::ConfusionMatrix cm = ctxmine::confusion_matrix(predicted, actual);
    const std::string report = ctxmine::metrics_report(cm);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir + "/metrics.json", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + out_dir + "/metrics.json");
        out << report;
    }
    std::cout << report;
    std::printf("accuracy %s\n", ctxmine::format_percent(ctxmine::accuracy(cm)).c_str());
    return 0;
}

int show_report(const std::string& out_dir) {
    const nlohmann::json j = nlohmann::json::parse(read_file(out_dir + "/report.json"));
    for (const auto& s : j.at("sections")) {
        std::printf("step %-9s %6llu -> %-6llu rows  %8.3fs\n",
                    s.at("step").get<std::string>().c_str(),
                    static_cast<unsigned long long>(s.at("rows_in").get<std::uint64_t>()),
                    static_cast<unsigned long long>(s.at("rows_out").get<std::uint64_t>()),
                    s.at("seconds").get<double>());
        for (const auto& a : s.at("artifacts"))
            std::printf("  %s\n", a.get<std::string>().c_str());
    }
    for (const auto& item : j.at("evaluation").items())
        std::printf("evaluation %s: %s\n", item.key().c_str(),
                    item.value().get<std::string>().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctxmine: context-driven data-mining lifecycle toolkit"};
    app.require_subcommand(1);

    // Shared option storage per subcommand.
    CommonOpts ingest_o, patterns_o, impute_o, outliers_o, regress_o, classify_o,
        evaluate_o, sentiment_o, run_o, report_o;

    std::string input_path, tweets_path, lexicon_path, predictions_path;

    auto* ingest = app.add_subcommand("ingest", "parse a CSV dataset and report missingness");
    add_common(ingest, ingest_o);
    ingest->add_option("--input", input_path, "dataset CSV path (overrides config)");

    auto* patterns = app.add_subcommand("patterns", "print distinct missingness patterns");
    add_common(patterns, patterns_o);
    patterns->add_option("--input", input_path, "dataset CSV path (overrides config)");

    auto* impute = app.add_subcommand("impute", "chained-equation imputation with PMM");
    add_common(impute, impute_o);
    impute->add_option("--input", input_path, "dataset CSV path (overrides config)");
    std::vector<std::string> impute_columns;
    int iterations = -1, donor_pool = -1;
    std::string visit_order;
    impute->add_option("--columns", impute_columns, "columns to impute")->delimiter(',');
    impute->add_option("--iterations", iterations, "chained-equation sweeps");
    impute->add_option("--donor-pool", donor_pool, "PMM donor pool size");
    impute->add_option("--visit-order", visit_order, "left_to_right or most_missing_first");

    auto* outliers = app.add_subcommand("outliers", "local outlier factor scores");
    add_common(outliers, outliers_o);
    outliers->add_option("--input", input_path, "dataset CSV path (overrides config)");
    std::vector<std::string> outlier_columns;
    int lof_k = -1, lof_top = -1;
    double lof_threshold = -1.0;
    bool lof_filter = false;
    outliers->add_option("--columns", outlier_columns, "feature columns")->delimiter(',');
    outliers->add_option("--k", lof_k, "neighbor count");
    outliers->add_option("--top", lof_top, "rows to report (0 = all)");
    outliers->add_option("--threshold", lof_threshold, "flagging threshold");
    outliers->add_flag("--filter", lof_filter, "drop flagged rows and write the filtered dataset");

    auto* regress = app.add_subcommand("regress", "weighted least squares trend prediction per group");
    add_common(regress, regress_o);
    regress->add_option("--input", input_path, "dataset CSV path (overrides config)");
    std::string reg_target, year_column;
    std::vector<std::string> reg_predictors, reg_group_by, reg_schemes;
    int min_points = -1;
    regress->add_option("--target", reg_target, "numeric response column");
    regress->add_option("--predictors", reg_predictors, "numeric predictor columns")->delimiter(',');
    regress->add_option("--group-by", reg_group_by, "grouping columns")->delimiter(',');
    regress->add_option("--year-column", year_column, "column defining train/test split and weights");
    regress->add_option("--min-points", min_points, "minimum training rows per group");
    regress->add_option("--schemes", reg_schemes, "weight scheme names")->delimiter(',');

    auto* classify = app.add_subcommand("classify", "random-forest classification with holdout metrics");
    add_common(classify, classify_o);
    classify->add_option("--input", input_path, "dataset CSV path (overrides config)");
    std::string cls_target;
    std::vector<std::string> cls_features;
    int trees = -1, max_depth = -1, min_leaf = -1, mtry = -1;
    double holdout = -1.0;
    classify->add_option("--target", cls_target, "class label column");
    classify->add_option("--features", cls_features, "feature columns")->delimiter(',');
    classify->add_option("--trees", trees, "number of trees");
    classify->add_option("--max-depth", max_depth, "depth limit (0 = unlimited)");
    classify->add_option("--min-leaf", min_leaf, "minimum rows per leaf");
    classify->add_option("--mtry", mtry, "features tried per split (0 = ceil(sqrt(p)))");
    classify->add_option("--holdout", holdout, "test fraction (0 = evaluate on training rows)");

    auto* evaluate = app.add_subcommand("evaluate", "confusion-matrix metrics from a predictions CSV");
    add_common(evaluate, evaluate_o);
    evaluate->add_option("--predictions", predictions_path,
                         "CSV with actual and predicted columns (default <out>/classify_predictions.csv)");

    auto* sentiment = app.add_subcommand("sentiment", "lexicon scoring and team coefficients");
    add_common(sentiment, sentiment_o);
    sentiment->add_option("--tweets", tweets_path, "tweet corpus TSV (overrides config)");
    sentiment->add_option("--lexicon", lexicon_path, "lexicon TSV (overrides config)");

    auto* run_cmd = app.add_subcommand("run", "execute the configured pipeline end to end");
    add_common(run_cmd, run_o);

    auto* report_cmd = app.add_subcommand("report", "print the run report from the output directory");
    add_common(report_cmd, report_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed() || patterns->parsed()) {
            const CommonOpts& opts = ingest->parsed() ? ingest_o : patterns_o;
            ctxmine::PipelineConfig cfg = base_config(opts);
            disable_all_steps(cfg);
            if (!input_path.empty()) cfg.dataset = input_path;
            if (cfg.dataset.empty()) throw std::runtime_error("no dataset: pass --input or a config");
            const ctxmine::RunReport rep = ctxmine::run(cfg);
            if (patterns->parsed())
                print_artifact(rep, "patterns.csv");
            else
                print_report(rep);
            return 0;
        }
        if (impute->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(impute_o);
            disable_all_steps(cfg);
            cfg.impute.enabled = true;
            if (!input_path.empty()) cfg.dataset = input_path;
            if (!impute_columns.empty()) cfg.impute.columns = impute_columns;
            if (iterations >= 0) cfg.impute.iterations = iterations;
            if (donor_pool >= 0) cfg.impute.donor_pool = donor_pool;
            if (!visit_order.empty()) cfg.impute.visit_order = visit_order;
            return run_pipeline(cfg);
        }
        if (outliers->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(outliers_o);
            disable_all_steps(cfg);
            cfg.outliers.enabled = true;
            if (!input_path.empty()) cfg.dataset = input_path;
            if (!outlier_columns.empty()) cfg.outliers.columns = outlier_columns;
            if (lof_k >= 0) cfg.outliers.k = lof_k;
            if (lof_top >= 0) cfg.outliers.top = lof_top;
            if (lof_threshold >= 0) cfg.outliers.threshold = lof_threshold;
            if (lof_filter) cfg.outliers.filter = true;
            return run_pipeline(cfg);
        }
        if (regress->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(regress_o);
            disable_all_steps(cfg);
            cfg.regress.enabled = true;
            if (!input_path.empty()) cfg.dataset = input_path;
            if (!reg_target.empty()) cfg.regress.target = reg_target;
            if (!reg_predictors.empty()) cfg.regress.predictors = reg_predictors;
            if (!reg_group_by.empty()) cfg.regress.group_by = reg_group_by;
            if (!year_column.empty()) cfg.regress.year_column = year_column;
            if (min_points >= 0) cfg.regress.min_points = min_points;
            if (!reg_schemes.empty()) cfg.regress.schemes = reg_schemes;
            return run_pipeline(cfg);
        }
        if (classify->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(classify_o);
            disable_all_steps(cfg);
            cfg.classify.enabled = true;
            if (!input_path.empty()) cfg.dataset = input_path;
            if (!cls_target.empty()) cfg.classify.target = cls_target;
            if (!cls_features.empty()) cfg.classify.features = cls_features;
            if (trees >= 0) cfg.classify.trees = trees;
            if (max_depth >= 0) cfg.classify.max_depth = max_depth;
            if (min_leaf >= 0) cfg.classify.min_leaf = min_leaf;
            if (mtry >= 0) cfg.classify.mtry = mtry;
            if (holdout >= 0) cfg.classify.holdout = holdout;
            return run_pipeline(cfg);
        }
        if (evaluate->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(evaluate_o);
            std::string path = predictions_path;
            if (path.empty()) path = cfg.output_dir + "/classify_predictions.csv";
            return evaluate_predictions(path, cfg.output_dir);
        }
        if (sentiment->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(sentiment_o);
            disable_all_steps(cfg);
            cfg.sentiment.enabled = true;
            cfg.dataset.clear();  // sentiment needs no tabular input
            cfg.context.clear();
            if (!tweets_path.empty()) cfg.tweets = tweets_path;
            if (!lexicon_path.empty()) cfg.lexicon = lexicon_path;
            const ctxmine::RunReport rep = ctxmine::run(cfg);
            print_artifact(rep, "coefficients.csv");
            return 0;
        }
        if (run_cmd->parsed()) {
            if (run_o.config_path.empty()) throw std::runtime_error("run requires --config");
            return run_pipeline(base_config(run_o));
        }
        if (report_cmd->parsed()) {
            ctxmine::PipelineConfig cfg = base_config(report_o);
            return show_report(cfg.output_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
