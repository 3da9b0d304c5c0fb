#include "ctxmine/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ctxmine {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (const auto& row : counts)
        for (std::int64_t c : row) sum += c;
    return sum;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& predicted,
                                 const std::vector<int>& actual,
                                 const std::vector<int>& classes) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("confusion_matrix: predicted and actual differ in length");
    if (actual.empty())
        throw std::invalid_argument("confusion_matrix: no labels");

    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (!index.emplace(classes[i], i).second)
            throw std::invalid_argument("confusion_matrix: duplicate class " +
                                        std::to_string(classes[i]));

    ConfusionMatrix m;
    m.classes = classes;
    m.counts.assign(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const auto pi = index.find(predicted[i]);
        const auto ai = index.find(actual[i]);
        if (pi == index.end() || ai == index.end())
            throw std::invalid_argument(
                "confusion_matrix: label " +
                std::to_string(pi == index.end() ? predicted[i] : actual[i]) +
                " is not in the class list");
        ++m.counts[pi->second][ai->second];
    }
    return m;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& predicted,
                                 const std::vector<int>& actual) {
    std::set<int> distinct(predicted.begin(), predicted.end());
    distinct.insert(actual.begin(), actual.end());
    return confusion_matrix(predicted, actual,
                            std::vector<int>(distinct.begin(), distinct.end()));
}

double accuracy(const ConfusionMatrix& m) {
    const std::int64_t total = m.total();
    if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
    return static_cast<double>(m.trace()) / static_cast<double>(total);
}

std::vector<std::optional<double>> per_class_recall(const ConfusionMatrix& m) {
    const std::size_t k = m.classes.size();
    std::vector<std::optional<double>> out(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::int64_t col = 0;
        for (std::size_t i = 0; i < k; ++i) col += m.counts[i][j];
        if (col > 0)
            out[j] = static_cast<double>(m.counts[j][j]) / static_cast<double>(col);
    }
    return out;
}

std::vector<std::optional<double>> per_class_precision(const ConfusionMatrix& m) {
    const std::size_t k = m.classes.size();
    std::vector<std::optional<double>> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < k; ++j) row += m.counts[i][j];
        if (row > 0)
            out[i] = static_cast<double>(m.counts[i][i]) / static_cast<double>(row);
    }
    return out;
}

namespace {

nlohmann::json optionals_to_json(const std::vector<std::optional<double>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& x : v) {
        if (x)
            arr.push_back(*x);
        else
            arr.push_back(nullptr);
    }
    return arr;
}

}  // namespace

std::string metrics_report(const ConfusionMatrix& m) {
    nlohmann::json j;
    j["classes"] = m.classes;
    j["counts"] = m.counts;
    j["accuracy"] = accuracy(m);
    j["per_class_recall"] = optionals_to_json(per_class_recall(m));
    j["per_class_precision"] = optionals_to_json(per_class_precision(m));
    return j.dump(2) + "\n";
}

std::string format_percent(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", ratio * 100.0);
    return buf;
}

}  // namespace ctxmine
