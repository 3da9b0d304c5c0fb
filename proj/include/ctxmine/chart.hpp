#pragma once

#include <string>
#include <vector>

namespace ctxmine {

// One group in the actual-vs-predicted bar chart.
struct ChartRow {
    std::string label;
    double actual = 0.0;
    double predicted = 0.0;
};

// Renders a self-contained SVG with a pair of bars per label.  Output bytes
// depend only on the input rows.  Empty input yields axes and legend only.
// Throws std::invalid_argument on negative values.
std::string render_bar_chart(const std::vector<ChartRow>& rows);

// render_bar_chart + write to disk; throws std::runtime_error when the path
// is unwritable.
void emit_bar_chart(const std::vector<ChartRow>& rows, const std::string& path);

}  // namespace ctxmine
