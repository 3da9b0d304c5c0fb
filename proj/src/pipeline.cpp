#include "ctxmine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctxmine/chart.hpp"
#include "ctxmine/forest.hpp"
#include "ctxmine/impute.hpp"
#include "ctxmine/lof.hpp"
#include "ctxmine/metrics.hpp"
#include "ctxmine/regression.hpp"
#include "ctxmine/rng.hpp"
#include "ctxmine/sentiment.hpp"
#include "ctxmine/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ctxmine {

namespace {

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void config_error(const std::string& what) {
    throw std::runtime_error("config: " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            config_error("unknown key \"" + item.key() + "\" in " + where);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(std::string("bad value for \"") + key + "\"");
    }
}

std::vector<std::string> get_string_list(const json& obj, const char* key,
                                         std::vector<std::string> fallback) {
    return get_or<std::vector<std::string>>(obj, key, std::move(fallback));
}

ImputeStepConfig parse_impute(const json& obj) {
    check_keys(obj, {"enabled", "columns", "iterations", "donor_pool", "visit_order", "ridge"},
               "steps.impute");
    ImputeStepConfig c;
    c.enabled = get_or(obj, "enabled", c.enabled);
    c.columns = get_string_list(obj, "columns", c.columns);
    c.iterations = get_or(obj, "iterations", c.iterations);
    c.donor_pool = get_or(obj, "donor_pool", c.donor_pool);
    c.visit_order = get_or(obj, "visit_order", c.visit_order);
    c.ridge = get_or(obj, "ridge", c.ridge);
    if (c.visit_order != "left_to_right" && c.visit_order != "most_missing_first")
        config_error("visit_order must be \"left_to_right\" or \"most_missing_first\"");
    return c;
}

OutlierStepConfig parse_outliers(const json& obj) {
    check_keys(obj, {"enabled", "columns", "k", "top", "threshold", "filter"},
               "steps.outliers");
    OutlierStepConfig c;
    c.enabled = get_or(obj, "enabled", c.enabled);
    c.columns = get_string_list(obj, "columns", c.columns);
    c.k = get_or(obj, "k", c.k);
    c.top = get_or(obj, "top", c.top);
    c.threshold = get_or(obj, "threshold", c.threshold);
    c.filter = get_or(obj, "filter", c.filter);
    return c;
}

RegressStepConfig parse_regress(const json& obj) {
    check_keys(obj,
               {"enabled", "target", "predictors", "group_by", "year_column", "min_points",
                "schemes"},
               "steps.regress");
    RegressStepConfig c;
    c.enabled = get_or(obj, "enabled", c.enabled);
    c.target = get_or(obj, "target", c.target);
    c.predictors = get_string_list(obj, "predictors", c.predictors);
    c.group_by = get_string_list(obj, "group_by", c.group_by);
    c.year_column = get_or(obj, "year_column", c.year_column);
    c.min_points = get_or(obj, "min_points", c.min_points);
    c.schemes = get_string_list(obj, "schemes", c.schemes);
    return c;
}

ClassifyStepConfig parse_classify(const json& obj) {
    check_keys(obj,
               {"enabled", "target", "features", "trees", "max_depth", "min_leaf", "mtry",
                "holdout"},
               "steps.classify");
    ClassifyStepConfig c;
    c.enabled = get_or(obj, "enabled", c.enabled);
    c.target = get_or(obj, "target", c.target);
    c.features = get_string_list(obj, "features", c.features);
    c.trees = get_or(obj, "trees", c.trees);
    c.max_depth = get_or(obj, "max_depth", c.max_depth);
    c.min_leaf = get_or(obj, "min_leaf", c.min_leaf);
    c.mtry = get_or(obj, "mtry", c.mtry);
    c.holdout = get_or(obj, "holdout", c.holdout);
    return c;
}

SentimentStepConfig parse_sentiment(const json& obj) {
    check_keys(obj, {"enabled"}, "steps.sentiment");
    SentimentStepConfig c;
    c.enabled = get_or(obj, "enabled", c.enabled);
    return c;
}

// ---------------------------------------------------------------------------
// Artifacts

// Writes content to <dir>/<name>.partial, then renames to <name>; an aborted
// run therefore leaves only ".partial" leftovers, never truncated artifacts.
std::string write_artifact(const std::string& dir, const std::string& name,
                           const std::string& content) {
    const fs::path final_path = fs::path(dir) / name;
    fs::path partial = final_path;
    partial += ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + partial.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + partial.string());
    }
    fs::rename(partial, final_path);
    return name;
}

// ---------------------------------------------------------------------------
// Table helpers

std::string canonical_cell(const Cell& cell) {
    if (cell.is_number()) return format_double(cell.number());
    if (cell.is_category()) return cell.label();
    return "NA";
}

Table select_rows(const Table& t, const std::vector<std::size_t>& rows) {
    std::vector<std::vector<Cell>> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        std::vector<Cell> row;
        row.reserve(t.col_count());
        for (std::size_t c = 0; c < t.col_count(); ++c) row.push_back(t.at(r, c));
        out.push_back(std::move(row));
    }
    return Table(t.schema(), std::move(out));
}

double numeric_at(const Table& t, std::size_t r, std::size_t c, const char* step) {
    const Cell& cell = t.at(r, c);
    if (!cell.is_number())
        throw std::runtime_error(std::string(step) + ": column \"" + t.column(c).name +
                                 "\" is not numeric at row " + std::to_string(r));
    return cell.number();
}

std::size_t require_numeric_column(const Table& t, const std::string& name,
                                   const char* step) {
    const std::size_t c = t.column_index(name);
    if (t.column(c).kind != ColumnKind::Numeric)
        throw std::runtime_error(std::string(step) + ": column \"" + name +
                                 "\" must be numeric");
    return c;
}

// Class codes for the classify target: integral numerics pass through;
// medal-labelled categoricals get the fixed Gold=1..No medal=4 codes; other
// categoricals get their 0-based category index.
std::vector<int> target_codes(const Table& t, std::size_t col,
                              const std::vector<std::size_t>& rows) {
    static const std::map<std::string, int> kMedals = {
        {"Gold", 1}, {"Silver", 2}, {"Bronze", 3}, {"No medal", 4}};
    const ColumnSpec& spec = t.column(col);
    std::vector<int> codes;
    codes.reserve(rows.size());
    if (spec.kind == ColumnKind::Numeric) {
        for (std::size_t r : rows) {
            const double v = t.at(r, col).number();
            const double nearest = std::nearbyint(v);
            if (std::abs(v - nearest) > 1e-9)
                throw std::runtime_error("classify: target \"" + spec.name +
                                         "\" has non-integer value at row " +
                                         std::to_string(r));
            codes.push_back(static_cast<int>(nearest));
        }
        return codes;
    }
    bool all_medals = !spec.categories.empty();
    for (const auto& cat : spec.categories)
        if (!kMedals.count(cat)) all_medals = false;
    for (std::size_t r : rows) {
        const std::string& label = t.at(r, col).label();
        if (all_medals) {
            codes.push_back(kMedals.at(label));
        } else {
            const auto it =
                std::find(spec.categories.begin(), spec.categories.end(), label);
            codes.push_back(static_cast<int>(it - spec.categories.begin()));
        }
    }
    return codes;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config surface

PipelineConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        config_error(e.what());
    }
    if (!root.is_object()) config_error("top level must be a JSON object");
    check_keys(root, {"seed", "output_dir", "inputs", "steps"}, "config");

    PipelineConfig cfg;
    if (root.contains("seed")) {
        if (!root.at("seed").is_number_unsigned()) config_error("seed must be a nonnegative integer");
        cfg.seed = root.at("seed").get<std::uint64_t>();
    }
    cfg.output_dir = get_or(root, "output_dir", cfg.output_dir);

    if (root.contains("inputs")) {
        const json& in = root.at("inputs");
        check_keys(in, {"dataset", "tweets", "lexicon", "context"}, "inputs");
        cfg.dataset = get_or(in, "dataset", cfg.dataset);
        cfg.tweets = get_or(in, "tweets", cfg.tweets);
        cfg.lexicon = get_or(in, "lexicon", cfg.lexicon);
        if (in.contains("context")) {
            if (!in.at("context").is_array()) config_error("inputs.context must be an array");
            for (const json& item : in.at("context")) {
                check_keys(item, {"path", "keys"}, "inputs.context entry");
                ContextJoinSpec spec;
                spec.path = get_or(item, "path", std::string());
                spec.keys = get_string_list(item, "keys", {});
                cfg.context.push_back(std::move(spec));
            }
        }
    }

    if (root.contains("steps")) {
        const json& steps = root.at("steps");
        check_keys(steps, {"impute", "outliers", "regress", "classify", "sentiment"}, "steps");
        if (steps.contains("impute")) cfg.impute = parse_impute(steps.at("impute"));
        if (steps.contains("outliers")) cfg.outliers = parse_outliers(steps.at("outliers"));
        if (steps.contains("regress")) cfg.regress = parse_regress(steps.at("regress"));
        if (steps.contains("classify")) cfg.classify = parse_classify(steps.at("classify"));
        if (steps.contains("sentiment")) cfg.sentiment = parse_sentiment(steps.at("sentiment"));
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
    json root;
    if (cfg.seed) root["seed"] = *cfg.seed;
    root["output_dir"] = cfg.output_dir;
    json inputs;
    inputs["dataset"] = cfg.dataset;
    inputs["tweets"] = cfg.tweets;
    inputs["lexicon"] = cfg.lexicon;
    json ctx = json::array();
    for (const auto& spec : cfg.context) ctx.push_back({{"path", spec.path}, {"keys", spec.keys}});
    inputs["context"] = ctx;
    root["inputs"] = inputs;
    json steps;
    steps["impute"] = {{"enabled", cfg.impute.enabled},
                       {"columns", cfg.impute.columns},
                       {"iterations", cfg.impute.iterations},
                       {"donor_pool", cfg.impute.donor_pool},
                       {"visit_order", cfg.impute.visit_order},
                       {"ridge", cfg.impute.ridge}};
    steps["outliers"] = {{"enabled", cfg.outliers.enabled},
                         {"columns", cfg.outliers.columns},
                         {"k", cfg.outliers.k},
                         {"top", cfg.outliers.top},
                         {"threshold", cfg.outliers.threshold},
                         {"filter", cfg.outliers.filter}};
    steps["regress"] = {{"enabled", cfg.regress.enabled},
                        {"target", cfg.regress.target},
                        {"predictors", cfg.regress.predictors},
                        {"group_by", cfg.regress.group_by},
                        {"year_column", cfg.regress.year_column},
                        {"min_points", cfg.regress.min_points},
                        {"schemes", cfg.regress.schemes}};
    steps["classify"] = {{"enabled", cfg.classify.enabled},
                         {"target", cfg.classify.target},
                         {"features", cfg.classify.features},
                         {"trees", cfg.classify.trees},
                         {"max_depth", cfg.classify.max_depth},
                         {"min_leaf", cfg.classify.min_leaf},
                         {"mtry", cfg.classify.mtry},
                         {"holdout", cfg.classify.holdout}};
    steps["sentiment"] = {{"enabled", cfg.sentiment.enabled}};
    root["steps"] = steps;
    return root.dump(2) + "\n";
}

void validate_config(const PipelineConfig& cfg) {
    const bool needs_dataset = !cfg.context.empty() || cfg.impute.enabled ||
                               cfg.outliers.enabled || cfg.regress.enabled ||
                               cfg.classify.enabled;
    if (needs_dataset && cfg.dataset.empty())
        config_error("a dataset path is required by the enabled steps");
    if (cfg.sentiment.enabled && (cfg.tweets.empty() || cfg.lexicon.empty()))
        config_error("sentiment requires tweets and lexicon paths");
    if ((cfg.impute.enabled || cfg.classify.enabled) && !cfg.seed)
        config_error("seed required when impute or classify is enabled");
    for (const auto& spec : cfg.context) {
        if (spec.path.empty()) config_error("context entry without a path");
        if (spec.keys.empty()) config_error("context entry without key columns");
    }
    if (cfg.impute.iterations < 1) config_error("impute.iterations must be >= 1");
    if (cfg.impute.donor_pool < 1) config_error("impute.donor_pool must be >= 1");
    if (cfg.impute.ridge < 0) config_error("impute.ridge must be >= 0");
    if (cfg.outliers.k < 1) config_error("outliers.k must be >= 1");
    if (cfg.outliers.top < 0) config_error("outliers.top must be >= 0");
    if (!(cfg.outliers.threshold > 0)) config_error("outliers.threshold must be > 0");
    if (cfg.regress.enabled) {
        if (cfg.regress.target.empty()) config_error("regress.target is required");
        if (cfg.regress.year_column.empty()) config_error("regress.year_column is required");
        if (cfg.regress.min_points < 1) config_error("regress.min_points must be >= 1");
        if (cfg.regress.schemes.empty()) config_error("regress.schemes must not be empty");
    }
    if (cfg.classify.enabled) {
        if (cfg.classify.target.empty()) config_error("classify.target is required");
        if (cfg.classify.features.empty()) config_error("classify.features is required");
        if (cfg.classify.trees < 1) config_error("classify.trees must be >= 1");
        if (cfg.classify.max_depth < 0) config_error("classify.max_depth must be >= 0");
        if (cfg.classify.min_leaf < 1) config_error("classify.min_leaf must be >= 1");
        if (cfg.classify.mtry < 0) config_error("classify.mtry must be >= 0");
        if (cfg.classify.holdout < 0 || cfg.classify.holdout >= 1)
            config_error("classify.holdout must be in [0, 1)");
    }
}

// ---------------------------------------------------------------------------
// Context join

Table context_join(const Table& primary, const Table& aux,
                   const std::vector<std::string>& keys, const std::string& aux_label) {
    std::vector<std::size_t> pkey, akey;
    for (const auto& key : keys) {
        const auto pc = primary.find_column(key);
        const auto ac = aux.find_column(key);
        if (!pc) throw std::runtime_error("join key \"" + key + "\" missing from dataset");
        if (!ac)
            throw std::runtime_error("join key \"" + key + "\" missing from " + aux_label);
        if (primary.column(*pc).kind != aux.column(*ac).kind)
            throw std::runtime_error("join key \"" + key + "\" has mismatched kinds between dataset and " +
                                     aux_label);
        pkey.push_back(*pc);
        akey.push_back(*ac);
    }

    // Columns the join adds: everything in aux that is not a key.
    std::vector<std::size_t> add;
    for (std::size_t c = 0; c < aux.col_count(); ++c) {
        if (std::find(akey.begin(), akey.end(), c) != akey.end()) continue;
        if (primary.find_column(aux.column(c).name))
            throw std::runtime_error("joined column \"" + aux.column(c).name +
                                     "\" from " + aux_label + " already exists in the dataset");
        add.push_back(c);
    }

    const auto key_of = [](const Table& t, std::size_t row,
                           const std::vector<std::size_t>& cols) -> std::optional<std::string> {
        std::string out;
        for (std::size_t c : cols) {
            const Cell& cell = t.at(row, c);
            if (cell.is_missing()) return std::nullopt;
            out += canonical_cell(cell);
            out += '\x1f';
        }
        return out;
    };

    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < aux.row_count(); ++r) {
        const auto key = key_of(aux, r, akey);
        if (!key)
            throw std::runtime_error(aux_label + ": missing value in a key column at row " +
                                     std::to_string(r + 1));
        if (!index.emplace(*key, r).second)
            throw std::runtime_error(aux_label + ": duplicate key at row " +
                                     std::to_string(r + 1));
    }

    std::vector<ColumnSpec> schema = primary.schema();
    for (std::size_t c : add) schema.push_back(aux.column(c));

    std::vector<std::vector<Cell>> rows;
    rows.reserve(primary.row_count());
    for (std::size_t r = 0; r < primary.row_count(); ++r) {
        std::vector<Cell> row;
        row.reserve(schema.size());
        for (std::size_t c = 0; c < primary.col_count(); ++c) row.push_back(primary.at(r, c));
        const auto key = key_of(primary, r, pkey);
        const auto hit = key ? index.find(*key) : index.end();
        for (std::size_t c : add) {
            if (hit != index.end())
                row.push_back(aux.at(hit->second, c));
            else
                row.push_back(Cell::missing());  // unmatched keys flow into imputation
        }
        rows.push_back(std::move(row));
    }
    return Table(std::move(schema), std::move(rows));
}

// ---------------------------------------------------------------------------
// Run report

std::string report_to_json(const RunReport& report) {
    json j;
    j["output_dir"] = report.output_dir;
    json sections = json::array();
    for (const auto& s : report.sections)
        sections.push_back({{"step", s.step},
                            {"seconds", s.seconds},
                            {"rows_in", s.rows_in},
                            {"rows_out", s.rows_out},
                            {"artifacts", s.artifacts}});
    j["sections"] = sections;
    j["evaluation"] = report.evaluation;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct StepRunner {
    RunReport& report;
    std::string dir;

    template <typename Fn>
    void operator()(const std::string& name, Fn&& body) {
        StepSection section;
        section.step = name;
        const auto start = std::chrono::steady_clock::now();
        try {
            body(section);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + name + ": " + e.what());
        }
        section.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
        report.sections.push_back(std::move(section));
    }
};

std::string patterns_csv(const MissingnessSummary& summary) {
    std::string out = "pattern,count\n";
    for (const auto& p : summary.patterns) {
        std::string mask;
        for (bool b : p.observed) mask += b ? '1' : '0';
        out += mask + "," + std::to_string(p.count) + "\n";
    }
    return out;
}

std::string missing_by_column_csv(const Table& t, const MissingnessSummary& summary) {
    std::string out = "column,missing_count\n";
    for (std::size_t c = 0; c < t.col_count(); ++c)
        out += t.column(c).name + "," + std::to_string(summary.column_missing[c]) + "\n";
    return out;
}

}  // namespace

RunReport run(const PipelineConfig& cfg) {
    validate_config(cfg);
    fs::create_directories(cfg.output_dir);

    RunReport report;
    report.output_dir = cfg.output_dir;
    StepRunner step{report, cfg.output_dir};
    const std::string& dir = cfg.output_dir;

    std::optional<Table> data;

    // Step 1: clean/wrangle.
    if (!cfg.dataset.empty()) {
        step("ingest", [&](StepSection& s) {
            data = ingest_csv(cfg.dataset);
            s.rows_in = s.rows_out = data->row_count();
            const MissingnessSummary summary = missingness_patterns(*data);
            s.artifacts.push_back(write_artifact(dir, "dataset_clean.csv", to_csv(*data)));
            s.artifacts.push_back(write_artifact(dir, "patterns.csv", patterns_csv(summary)));
            s.artifacts.push_back(
                write_artifact(dir, "missing_by_column.csv", missing_by_column_csv(*data, summary)));
        });
    }

    // Step 2: context injection.
    if (!cfg.context.empty()) {
        step("context", [&](StepSection& s) {
            s.rows_in = data->row_count();
            for (const auto& spec : cfg.context)
                data = context_join(*data, ingest_csv(spec.path), spec.keys, spec.path);
            s.rows_out = data->row_count();
            s.artifacts.push_back(write_artifact(dir, "dataset_context.csv", to_csv(*data)));
        });
    }

    // Step 3a: imputation.
    if (cfg.impute.enabled) {
        step("impute", [&](StepSection& s) {
            s.rows_in = data->row_count();
            std::vector<std::string> columns = cfg.impute.columns;
            if (columns.empty())
                for (std::size_t c = 0; c < data->col_count(); ++c)
                    if (data->missing_in_column(c) > 0) columns.push_back(data->column(c).name);
            MiceConfig mc;
            mc.iterations = cfg.impute.iterations;
            mc.donor_pool = cfg.impute.donor_pool;
            mc.seed = *cfg.seed;
            mc.ridge = cfg.impute.ridge;
            mc.visit_order = cfg.impute.visit_order == "most_missing_first"
                                 ? MiceConfig::VisitOrder::MostMissingFirst
                                 : MiceConfig::VisitOrder::LeftToRight;
            MiceResult result = mice_impute(*data, columns, mc);

            std::string chain = "iteration,column,mean_imputed\n";
            for (const auto& m : result.chain_means)
                chain += std::to_string(m.iteration) + "," + m.column + "," +
                         format_double(m.mean_imputed) + "\n";
            std::string cells = "row,column,value\n";
            for (const auto& cell : result.imputed_cells)
                cells += std::to_string(cell.row) + "," + cell.column + "," +
                         canonical_cell(cell.value) + "\n";

            data = std::move(result.completed);
            s.rows_out = data->row_count();
            s.artifacts.push_back(write_artifact(dir, "dataset_imputed.csv", to_csv(*data)));
            s.artifacts.push_back(write_artifact(dir, "chain_means.csv", chain));
            s.artifacts.push_back(write_artifact(dir, "imputed_cells.csv", cells));
        });
    }

    // Step 3b: outlier scoring (flag by default, filter on request).
    if (cfg.outliers.enabled) {
        step("outliers", [&](StepSection& s) {
            s.rows_in = data->row_count();
            std::vector<std::string> columns = cfg.outliers.columns;
            if (columns.empty())
                for (const auto& spec : data->schema()) columns.push_back(spec.name);
            const EncodedMatrix enc = encode_and_scale(*data, columns);
            LofConfig lc;
            lc.k = cfg.outliers.k;
            const LofScores scores = lof_scores(enc.values, lc);

            const std::size_t n = static_cast<std::size_t>(enc.values.rows());
            const std::size_t limit =
                cfg.outliers.top > 0 ? std::min<std::size_t>(cfg.outliers.top, n) : n;
            const std::vector<int> order = top_outliers(scores, limit);
            std::string csv = "row_index,lof,kdist\n";
            for (int idx : order)
                csv += std::to_string(idx) + "," + format_double(scores.scores[idx]) + "," +
                       format_double(scores.kdist[idx]) + "\n";
            s.artifacts.push_back(write_artifact(dir, "outliers.csv", csv));

            if (cfg.outliers.filter) {
                std::vector<std::size_t> keep;
                for (std::size_t r = 0; r < n; ++r)
                    if (!(scores.scores[r] > cfg.outliers.threshold)) keep.push_back(r);
                data = select_rows(*data, keep);
                s.artifacts.push_back(
                    write_artifact(dir, "dataset_filtered.csv", to_csv(*data)));
            }
            s.rows_out = data->row_count();
        });
    }

    // Step 4a: weighted trend regression per group.
    if (cfg.regress.enabled) {
        step("regress", [&](StepSection& s) {
            const Table& t = *data;
            std::vector<std::string> predictors = cfg.regress.predictors;
            if (predictors.empty()) predictors.push_back(cfg.regress.year_column);

            const std::size_t target_col = require_numeric_column(t, cfg.regress.target, "regress");
            const std::size_t year_col = require_numeric_column(t, cfg.regress.year_column, "regress");
            std::vector<std::size_t> pred_cols;
            for (const auto& name : predictors)
                pred_cols.push_back(require_numeric_column(t, name, "regress"));
            std::vector<std::size_t> group_cols;
            for (const auto& name : cfg.regress.group_by)
                group_cols.push_back(t.column_index(name));

            // Rows usable for fitting: every involved column observed.
            const auto usable = [&](std::size_t r) {
                if (t.is_missing(r, target_col) || t.is_missing(r, year_col)) return false;
                for (std::size_t c : pred_cols)
                    if (t.is_missing(r, c)) return false;
                for (std::size_t c : group_cols)
                    if (t.is_missing(r, c)) return false;
                return true;
            };

            std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
            std::size_t considered = 0;
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                if (!usable(r)) continue;
                ++considered;
                std::vector<std::string> key;
                key.reserve(group_cols.size());
                for (std::size_t c : group_cols) key.push_back(canonical_cell(t.at(r, c)));
                groups[std::move(key)].push_back(r);
            }
            s.rows_in = considered;

            const auto scenarios = weight_scenarios();
            std::vector<const WeightScheme*> schemes;
            for (const auto& name : cfg.regress.schemes) {
                const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                             [&](const WeightScheme& w) { return w.name == name; });
                if (it == scenarios.end())
                    throw std::runtime_error("unknown weight scheme \"" + name + "\"");
                schemes.push_back(&*it);
            }

            std::string csv;
            for (const auto& name : cfg.regress.group_by) csv += name + ",";
            csv += "scheme,actual,predicted_raw,predicted_rounded\n";
            std::vector<ChartRow> chart;
            std::size_t emitted = 0;

            for (const auto& [key, rows] : groups) {
                int max_year = 0;
                for (std::size_t r : rows)
                    max_year = std::max(
                        max_year,
                        static_cast<int>(std::llround(numeric_at(t, r, year_col, "regress"))));
                std::vector<std::size_t> train, test;
                for (std::size_t r : rows) {
                    const int year =
                        static_cast<int>(std::llround(numeric_at(t, r, year_col, "regress")));
                    (year == max_year ? test : train).push_back(r);
                }
                if (static_cast<int>(train.size()) < cfg.regress.min_points || test.empty())
                    continue;  // not enough history to fit this group

                int max_train_year = 0;
                for (std::size_t r : train)
                    max_train_year = std::max(
                        max_train_year,
                        static_cast<int>(std::llround(t.at(r, year_col).number())));

                Eigen::MatrixXd X(static_cast<Eigen::Index>(train.size()),
                                  static_cast<Eigen::Index>(pred_cols.size()));
                Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
                for (std::size_t i = 0; i < train.size(); ++i) {
                    for (std::size_t j = 0; j < pred_cols.size(); ++j)
                        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                            t.at(train[i], pred_cols[j]).number();
                    y(static_cast<Eigen::Index>(i)) = t.at(train[i], target_col).number();
                }
                Eigen::MatrixXd X_test(static_cast<Eigen::Index>(test.size()),
                                       static_cast<Eigen::Index>(pred_cols.size()));
                for (std::size_t i = 0; i < test.size(); ++i)
                    for (std::size_t j = 0; j < pred_cols.size(); ++j)
                        X_test(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                            t.at(test[i], pred_cols[j]).number();

                for (std::size_t si = 0; si < schemes.size(); ++si) {
                    Eigen::VectorXd w(static_cast<Eigen::Index>(train.size()));
                    for (std::size_t i = 0; i < train.size(); ++i) {
                        const int year = static_cast<int>(
                            std::llround(t.at(train[i], year_col).number()));
                        w(static_cast<Eigen::Index>(i)) =
                            schemes[si]->weight(year, max_train_year);
                    }
                    const LinearFit fit = fit_wls(X, y, w);
                    const Eigen::VectorXd yhat = predict(fit, X_test);
                    for (std::size_t i = 0; i < test.size(); ++i) {
                        const double actual = t.at(test[i], target_col).number();
                        const double raw = yhat(static_cast<Eigen::Index>(i));
                        const double rounded = round_medals(raw);
                        for (const auto& part : key) csv += part + ",";
                        csv += schemes[si]->name + "," + format_double(actual) + "," +
                               format_double(raw) + "," + format_double(rounded) + "\n";
                        ++emitted;
                        if (si == 0) {
                            std::string label;
                            for (const auto& part : key) {
                                if (!label.empty()) label += ' ';
                                label += part;
                            }
                            chart.push_back({label, std::max(0.0, actual), rounded});
                        }
                    }
                }
            }
            s.rows_out = emitted;
            s.artifacts.push_back(write_artifact(dir, "predictions.csv", csv));
            s.artifacts.push_back(
                write_artifact(dir, "medals_chart.svg", render_bar_chart(chart)));
        });
    }

    // Step 4b: random-forest classification, evaluated on a seeded holdout.
    if (cfg.classify.enabled) {
        step("classify", [&](StepSection& s) {
            const Table& t = *data;
            const std::size_t target_col = t.column_index(cfg.classify.target);
            std::vector<std::size_t> feature_cols;
            for (const auto& name : cfg.classify.features)
                feature_cols.push_back(t.column_index(name));

            std::vector<std::size_t> usable;
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                bool ok = !t.is_missing(r, target_col);
                for (std::size_t c : feature_cols) ok = ok && !t.is_missing(r, c);
                if (ok) usable.push_back(r);
            }
            s.rows_in = usable.size();
            if (usable.size() < 2)
                throw std::runtime_error("fewer than 2 complete rows to train on");

            const Table subset = select_rows(t, usable);
            const EncodedMatrix enc = encode_and_scale(subset, cfg.classify.features);
            std::vector<std::size_t> all_rows(usable.size());
            for (std::size_t i = 0; i < usable.size(); ++i) all_rows[i] = i;
            const std::vector<int> codes = target_codes(subset, subset.column_index(cfg.classify.target), all_rows);

            // Seeded shuffle -> first ceil(m*holdout) rows become the test set.
            std::vector<std::size_t> shuffled = all_rows;
            Rng rng(Rng::derive(*cfg.seed, 3, 7));
            for (std::size_t i = shuffled.size() - 1; i > 0; --i)
                std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
            std::size_t n_test = 0;
            if (cfg.classify.holdout > 0) {
                n_test = static_cast<std::size_t>(
                    static_cast<double>(shuffled.size()) * cfg.classify.holdout);
                n_test = std::max<std::size_t>(n_test, 1);
                n_test = std::min(n_test, shuffled.size() - 1);
            }
            std::vector<std::size_t> test(shuffled.begin(),
                                          shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
            std::vector<std::size_t> train(shuffled.begin() + static_cast<std::ptrdiff_t>(n_test),
                                           shuffled.end());
            std::sort(test.begin(), test.end());
            std::sort(train.begin(), train.end());

            std::vector<int> y_train;
            for (std::size_t i : train) y_train.push_back(codes[i]);
            ForestConfig fc;
            fc.n_trees = cfg.classify.trees;
            fc.max_depth = cfg.classify.max_depth;
            fc.min_leaf = cfg.classify.min_leaf;
            fc.mtry = cfg.classify.mtry;
            fc.seed = *cfg.seed;
            const ForestModel model = train_forest(take_rows(enc.values, train), y_train, fc);
            s.artifacts.push_back(
                write_artifact(dir, "forest_model.txt", forest_to_string(model)));

            const std::vector<std::size_t>& eval_rows = n_test > 0 ? test : all_rows;
            const std::vector<int> predicted =
                predict_forest(model, take_rows(enc.values, eval_rows));
            std::vector<int> actual;
            for (std::size_t i : eval_rows) actual.push_back(codes[i]);

            std::string csv = "row_index,actual,predicted\n";
            for (std::size_t i = 0; i < eval_rows.size(); ++i)
                csv += std::to_string(usable[eval_rows[i]]) + "," + std::to_string(actual[i]) +
                       "," + std::to_string(predicted[i]) + "\n";
            s.artifacts.push_back(write_artifact(dir, "classify_predictions.csv", csv));

            const ConfusionMatrix cm = confusion_matrix(predicted, actual);
            s.artifacts.push_back(write_artifact(dir, "metrics.json", metrics_report(cm)));
            report.evaluation["metrics"] = "metrics.json";
            s.rows_out = eval_rows.size();
        });
    }

    // Step 4c/5: sentiment coefficient and its evaluation CSV.
    if (cfg.sentiment.enabled) {
        step("sentiment", [&](StepSection& s) {
            const Lexicon lex = load_lexicon(cfg.lexicon);
            const std::vector<TweetRecord> tweets = load_tweets(cfg.tweets);
            s.rows_in = tweets.size();
            const std::vector<int> scores = score_corpus(lex, tweets);
            const std::vector<TeamCoefficient> coeffs = team_coefficients(scores, tweets);

            std::map<std::string, const TeamCoefficient*> by_team;
            for (const auto& c : coeffs) by_team[c.team] = &c;
            std::vector<TeamCoefficient> ranked;
            for (const auto& team : rank_teams(coeffs)) ranked.push_back(*by_team.at(team));
            s.artifacts.push_back(
                write_artifact(dir, "coefficients.csv", coefficients_csv(ranked)));

            std::string countries = "country,mean_score\n";
            for (const auto& [country, mean] : country_aggregate(scores, tweets))
                countries += country + "," + format_double(mean) + "\n";
            s.artifacts.push_back(write_artifact(dir, "country_means.csv", countries));

            report.evaluation["coefficients"] = "coefficients.csv";
            s.rows_out = coeffs.size();
        });
    }

    write_artifact(dir, "report.json", report_to_json(report));
    return report;
}

}  // namespace ctxmine
