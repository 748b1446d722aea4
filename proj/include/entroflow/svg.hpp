#pragma once

#include <string>
#include <vector>

namespace entroflow {

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool loglog = false;
    std::vector<PlotSeries> series;
};

// Self-contained SVG line plot, no external renderer. Log-log plots use the
// same scale per decade on both axes, so data with error = C * eps^p maps to a
// polyline of plot slope p (up to the inverted y direction of SVG).
std::string render_svg_plot(const PlotSpec& spec);
void write_svg_plot(const PlotSpec& spec, const std::string& path);

}  // namespace entroflow
