#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctxmine {

// Confusion matrix over integer class labels.  counts[i][j] is the number of
// rows predicted as classes[i] whose actual label is classes[j]: rows are
// predictions, columns are ground truth.
struct ConfusionMatrix {
    std::vector<int> classes;                   // ascending
    std::vector<std::vector<std::int64_t>> counts;  // [predicted][actual]

    std::int64_t total() const;
    std::int64_t trace() const;
};

// Builds the matrix from parallel label vectors over the given class list
// (order preserved).  Throws std::invalid_argument on length mismatch, empty
// input, a duplicate class, or a label missing from `classes`.
ConfusionMatrix confusion_matrix(const std::vector<int>& predicted,
                                 const std::vector<int>& actual,
                                 const std::vector<int>& classes);

// Convenience: classes = sorted union of the labels seen.
ConfusionMatrix confusion_matrix(const std::vector<int>& predicted,
                                 const std::vector<int>& actual);

// Overall accuracy: trace / total.
double accuracy(const ConfusionMatrix& m);

// Recall per class (diagonal over column sum).  Classes that never occur in
// the actual labels have no defined recall and yield nullopt.
std::vector<std::optional<double>> per_class_recall(const ConfusionMatrix& m);

// Precision per class (diagonal over row sum).  Classes never predicted
// yield nullopt.
std::vector<std::optional<double>> per_class_precision(const ConfusionMatrix& m);

// JSON report with the matrix, accuracy and per-class figures.  Undefined
// entries serialize as null.
std::string metrics_report(const ConfusionMatrix& m);

// Formats a ratio in [0,1] as a percentage with two decimals, e.g. "83.96%".
std::string format_percent(double ratio);

}  // namespace ctxmine
