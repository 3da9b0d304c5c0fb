#include "ctxmine/chart.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "ctxmine/util.hpp"

namespace ctxmine {

namespace {

// Layout constants; the canvas grows horizontally with the number of groups.
constexpr double kMarginLeft = 52.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 48.0;
constexpr double kPlotHeight = 240.0;
constexpr double kGroupWidth = 76.0;
constexpr double kBarWidth = 26.0;
constexpr double kBarGap = 6.0;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return format_double(v); }

void append_rect(std::string& svg, double x, double y, double w, double h,
                 const char* fill) {
    svg += "  <rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

void append_line(std::string& svg, double x1, double y1, double x2, double y2) {
    svg += "  <line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
           "\" y2=\"" + num(y2) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
}

void append_text(std::string& svg, double x, double y, const std::string& text,
                 const char* anchor) {
    svg += "  <text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" " +
           "font-size=\"11\" fill=\"#333333\" text-anchor=\"" + anchor + "\">" +
           xml_escape(text) + "</text>\n";
}

}  // namespace

std::string render_bar_chart(const std::vector<ChartRow>& rows) {
    double max_value = 0.0;
    for (const auto& r : rows) {
        if (r.actual < 0.0 || r.predicted < 0.0)
            throw std::invalid_argument("render_bar_chart: negative value for label \"" +
                                        r.label + "\"");
        max_value = std::max({max_value, r.actual, r.predicted});
    }
    if (max_value == 0.0) max_value = 1.0;

    const double plot_width = std::max(kGroupWidth, kGroupWidth * static_cast<double>(rows.size()));
    const double width = kMarginLeft + plot_width + kMarginRight;
    const double height = kMarginTop + kPlotHeight + kMarginBottom;
    const double baseline = kMarginTop + kPlotHeight;
    const auto bar_y = [&](double v) { return baseline - kPlotHeight * (v / max_value); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
           num(height) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"#ffffff\"/>\n";

    // Axes.
    append_line(svg, kMarginLeft, kMarginTop, kMarginLeft, baseline);
    append_line(svg, kMarginLeft, baseline, kMarginLeft + plot_width, baseline);
    append_text(svg, kMarginLeft - 6.0, baseline + 4.0, "0", "end");
    append_text(svg, kMarginLeft - 6.0, kMarginTop + 4.0, num(max_value), "end");

    svg += "  <g id=\"legend\">\n";
    append_rect(svg, kMarginLeft, 10.0, 12.0, 12.0, "#4477aa");
    append_text(svg, kMarginLeft + 16.0, 20.0, "actual", "start");
    append_rect(svg, kMarginLeft + 76.0, 10.0, 12.0, 12.0, "#ee6677");
    append_text(svg, kMarginLeft + 92.0, 20.0, "predicted", "start");
    svg += "  </g>\n";

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double group_x = kMarginLeft + kGroupWidth * static_cast<double>(i);
        const double center = group_x + kGroupWidth / 2.0;
        const double ax = center - kBarWidth - kBarGap / 2.0;
        const double px = center + kBarGap / 2.0;
        append_rect(svg, ax, bar_y(rows[i].actual), kBarWidth,
                    baseline - bar_y(rows[i].actual), "#4477aa");
        append_rect(svg, px, bar_y(rows[i].predicted), kBarWidth,
                    baseline - bar_y(rows[i].predicted), "#ee6677");
        append_text(svg, center, baseline + 16.0, rows[i].label, "middle");
    }

    svg += "</svg>\n";
    return svg;
}

void emit_bar_chart(const std::vector<ChartRow>& rows, const std::string& path) {
    const std::string svg = render_bar_chart(rows);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << svg;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace ctxmine
