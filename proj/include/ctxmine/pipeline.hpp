#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxmine/table.hpp"

namespace ctxmine {

// One auxiliary CSV joined onto the dataset (context injection).
struct ContextJoinSpec {
    std::string path;
    std::vector<std::string> keys;  // join key columns, present in both files

    bool operator==(const ContextJoinSpec&) const = default;
};

struct ImputeStepConfig {
    bool enabled = false;
    // Columns to impute; empty means every column that has missing cells.
    std::vector<std::string> columns;
    int iterations = 50;
    int donor_pool = 5;
    std::string visit_order = "left_to_right";  // or "most_missing_first"
    double ridge = 1e-8;

    bool operator==(const ImputeStepConfig&) const = default;
};

struct OutlierStepConfig {
    bool enabled = false;
    // Feature columns for the LOF distance; empty means all columns.
    std::vector<std::string> columns;
    int k = 5;
    int top = 0;  // rows in outliers.csv; 0 = all rows
    double threshold = 1.5;  // scores above this are flagged
    bool filter = false;     // drop flagged rows before modeling

    bool operator==(const OutlierStepConfig&) const = default;
};

struct RegressStepConfig {
    bool enabled = false;
    std::string target;
    // Numeric predictor columns; empty means just the year column.
    std::vector<std::string> predictors;
    std::vector<std::string> group_by = {"country", "sport"};
    std::string year_column = "year";
    int min_points = 3;  // minimum training rows per group
    std::vector<std::string> schemes = {"uniform"};

    bool operator==(const RegressStepConfig&) const = default;
};

struct ClassifyStepConfig {
    bool enabled = false;
    std::string target;
    std::vector<std::string> features;
    int trees = 100;
    int max_depth = 0;
    int min_leaf = 1;
    int mtry = 0;
    double holdout = 0.25;  // test fraction; 0 = evaluate on the training rows

    bool operator==(const ClassifyStepConfig&) const = default;
};

struct SentimentStepConfig {
    bool enabled = false;

    bool operator==(const SentimentStepConfig&) const = default;
};

struct PipelineConfig {
    std::optional<std::uint64_t> seed;
    std::string output_dir = "out";
    std::string dataset;  // primary CSV; empty = none
    std::string tweets;   // tweet corpus TSV
    std::string lexicon;  // lexicon TSV
    std::vector<ContextJoinSpec> context;
    ImputeStepConfig impute;
    OutlierStepConfig outliers;
    RegressStepConfig regress;
    ClassifyStepConfig classify;
    SentimentStepConfig sentiment;

    bool operator==(const PipelineConfig&) const = default;
};

// JSON configuration; unknown keys are errors so typos surface early.
// parse(serialize(parse(text))) == parse(text).
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string serialize_config(const PipelineConfig& cfg);

// Validates cross-field requirements: enabled steps have their inputs and a
// seed exists whenever a stochastic step (impute, classify) is enabled.
void validate_config(const PipelineConfig& cfg);

struct StepSection {
    std::string step;
    double seconds = 0.0;
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::vector<std::string> artifacts;  // file names relative to output_dir
};

struct RunReport {
    std::string output_dir;
    std::vector<StepSection> sections;
    // "metrics" -> metrics.json, "coefficients" -> coefficients.csv, when produced.
    std::map<std::string, std::string> evaluation;
};

std::string report_to_json(const RunReport& report);

// Executes the enabled steps in lifecycle order: ingest, context join,
// impute, outliers, regress, classify, sentiment. Artifacts land in
// cfg.output_dir, written to a ".partial" path and renamed on completion.
// A step failure throws std::runtime_error("step <name>: <cause>").
RunReport run(const PipelineConfig& cfg);

// Left join of aux onto primary over the key columns. Key kinds must match;
// duplicate keys in aux are an error; unmatched primary rows get MISSING in
// every joined column. aux_label names the file in error messages.
Table context_join(const Table& primary, const Table& aux,
                   const std::vector<std::string>& keys, const std::string& aux_label);

}  // namespace ctxmine
