#include "trajkit/svg_scatter.hpp"

#include "trajkit/csv.hpp"

#include <algorithm>
#include <stdexcept>

namespace trajkit {

const std::array<const char*, 8> kScatterPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
};

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kPlotLeft = 50.0;
constexpr double kPlotTop = 20.0;
constexpr double kPlotRight = 520.0;
constexpr double kPlotBottom = 440.0;

struct AxisScale {
    double min;
    double span;
};

AxisScale scaled_range(double lo, double hi) {
    double span = hi - lo;
    if (span <= 0.0) {
        // Degenerate axis: widen around the single value.
        lo -= 0.5;
        span = 1.0;
    }
    const double margin = span * 0.05;
    return {lo - margin, span + 2.0 * margin};
}

} // namespace

std::string scatter_svg(const Embedding2D& embedding, const std::vector<int>& tier_ranks,
                        const std::vector<TierLabel>& tiers) {
    const std::size_t n = embedding.coords.rows();
    if (n == 0) {
        throw std::invalid_argument("scatter_svg: empty embedding");
    }
    if (tier_ranks.size() != n) {
        throw std::invalid_argument("scatter_svg: tier count does not match embedding size");
    }

    double x_lo = embedding.coords(0, 0), x_hi = x_lo;
    double y_lo = embedding.coords(0, 1), y_hi = y_lo;
    for (std::size_t i = 1; i < n; ++i) {
        x_lo = std::min(x_lo, embedding.coords(i, 0));
        x_hi = std::max(x_hi, embedding.coords(i, 0));
        y_lo = std::min(y_lo, embedding.coords(i, 1));
        y_hi = std::max(y_hi, embedding.coords(i, 1));
    }
    const AxisScale x_axis = scaled_range(x_lo, x_hi);
    const AxisScale y_axis = scaled_range(y_lo, y_hi);

    const auto to_px_x = [&](double x) {
        return kPlotLeft + (x - x_axis.min) / x_axis.span * (kPlotRight - kPlotLeft);
    };
    const auto to_px_y = [&](double y) {
        // SVG y grows downward.
        return kPlotBottom - (y - y_axis.min) / y_axis.span * (kPlotBottom - kPlotTop);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(kWidth) +
           "\" height=\"" + format_double(kHeight) + "\" viewBox=\"0 0 " + format_double(kWidth) +
           " " + format_double(kHeight) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + format_double(kWidth) + "\" height=\"" +
           format_double(kHeight) + "\" fill=\"white\"/>\n";
    svg += "  <rect x=\"" + format_double(kPlotLeft) + "\" y=\"" + format_double(kPlotTop) +
           "\" width=\"" + format_double(kPlotRight - kPlotLeft) + "\" height=\"" +
           format_double(kPlotBottom - kPlotTop) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";

    // Axis extent labels.
    svg += "  <text x=\"" + format_double(kPlotLeft) + "\" y=\"" + format_double(kPlotBottom + 16.0) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + format_fixed(x_axis.min, 2) + "</text>\n";
    svg += "  <text x=\"" + format_double(kPlotRight - 40.0) + "\" y=\"" +
           format_double(kPlotBottom + 16.0) + "\" font-size=\"10\" font-family=\"sans-serif\">" +
           format_fixed(x_axis.min + x_axis.span, 2) + "</text>\n";
    svg += "  <text x=\"" + format_double(kPlotLeft - 44.0) + "\" y=\"" + format_double(kPlotBottom) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + format_fixed(y_axis.min, 2) + "</text>\n";
    svg += "  <text x=\"" + format_double(kPlotLeft - 44.0) + "\" y=\"" + format_double(kPlotTop + 10.0) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + format_fixed(y_axis.min + y_axis.span, 2) +
           "</text>\n";

    for (std::size_t i = 0; i < n; ++i) {
        const auto color_index = static_cast<std::size_t>(tier_ranks[i]) % kScatterPalette.size();
        svg += "  <circle cx=\"" + format_fixed(to_px_x(embedding.coords(i, 0)), 2) + "\" cy=\"" +
               format_fixed(to_px_y(embedding.coords(i, 1)), 2) + "\" r=\"3\" fill=\"" +
               kScatterPalette[color_index] + "\" fill-opacity=\"0.8\"/>\n";
    }

    double legend_y = kPlotTop + 10.0;
    for (const auto& tier : tiers) {
        const auto color_index = static_cast<std::size_t>(tier.rank) % kScatterPalette.size();
        svg += "  <rect x=\"" + format_double(kPlotRight + 12.0) + "\" y=\"" +
               format_double(legend_y - 9.0) + "\" width=\"10\" height=\"10\" fill=\"" +
               kScatterPalette[color_index] + "\"/>\n";
        svg += "  <text x=\"" + format_double(kPlotRight + 26.0) + "\" y=\"" + format_double(legend_y) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" + tier.name + "</text>\n";
        legend_y += 16.0;
    }

    svg += "</svg>\n";
    return svg;
}

void emit_scatter_svg(const Embedding2D& embedding, const std::vector<int>& tier_ranks,
                      const std::vector<TierLabel>& tiers, const std::string& path) {
    write_file_atomic(path, scatter_svg(embedding, tier_ranks, tiers));
}

} // namespace trajkit
