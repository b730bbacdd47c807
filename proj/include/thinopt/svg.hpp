#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thinopt {

// Minimal deterministic SVG charts: fixed canvas, linear axes with rounded
// tick steps, no timestamps or external resources.

struct SvgSeries {
    std::string label;
    std::string color; // CSS color
    std::vector<std::pair<double, double>> points;
};

// Polyline chart; axes cover the extent of all series.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::span<const SvgSeries> series);

// Scatter chart with one color per group and a legend.
void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> groups);

} // namespace thinopt
