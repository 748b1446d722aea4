#include "entroflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace entroflow {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b"};
constexpr int kWidth = 640, kHeight = 480;
constexpr double kLeft = 72, kRight = 606, kTop = 48, kBottom = 430;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec) {
    // Collect plottable points.
    struct Pt { double u, v; };
    std::vector<std::vector<Pt>> data(spec.series.size());
    double umin = 0, umax = 0, vmin = 0, vmax = 0;
    bool any = false;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const PlotSeries& sr = spec.series[s];
        if (sr.x.size() != sr.y.size())
            throw std::invalid_argument("plot series arity mismatch: " + sr.name);
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            double u = sr.x[i], v = sr.y[i];
            if (!std::isfinite(u) || !std::isfinite(v)) continue;
            if (spec.loglog) {
                if (!(u > 0.0 && v > 0.0)) continue;
                u = std::log10(u);
                v = std::log10(v);
            }
            if (!any) { umin = umax = u; vmin = vmax = v; any = true; }
            umin = std::min(umin, u); umax = std::max(umax, u);
            vmin = std::min(vmin, v); vmax = std::max(vmax, v);
            data[s].push_back({u, v});
        }
    }
    if (!any) { umin = vmin = 0.0; umax = vmax = 1.0; }
    if (umax - umin < 1e-300) { umin -= 0.5; umax += 0.5; }
    if (vmax - vmin < 1e-300) { vmin -= 0.5; vmax += 0.5; }

    const double plot_w = kRight - kLeft, plot_h = kBottom - kTop;
    double sx = plot_w / (umax - umin), sy = plot_h / (vmax - vmin);
    double offx = 0.0, offy = 0.0;
    if (spec.loglog) {
        // isotropic decades, centered
        const double s = std::min(sx, sy);
        offx = 0.5 * (plot_w - s * (umax - umin));
        offy = 0.5 * (plot_h - s * (vmax - vmin));
        sx = sy = s;
    }
    auto px = [&](double u) { return kLeft + offx + (u - umin) * sx; };
    auto py = [&](double v) { return kBottom - offy - (v - vmin) * sy; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">"
        << escape(spec.title) << "</text>\n";
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
        << num(plot_w) << "\" height=\"" << num(plot_h)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";

    auto tick_label = [&](double t) {
        return spec.loglog ? ("1e" + num(t)) : num(t);
    };
    out << "<text x=\"" << num(px(umin)) << "\" y=\"" << num(kBottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(umin) << "</text>\n";
    out << "<text x=\"" << num(px(umax)) << "\" y=\"" << num(kBottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(umax) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(vmin))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(vmin) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(vmax))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(vmax) << "</text>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(spec.xlabel) << "</text>\n";
    out << "<text x=\"18\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 "
        << kHeight / 2 << ")\">" << escape(spec.ylabel) << "</text>\n";

    for (std::size_t s = 0; s < data.size(); ++s) {
        const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
        if (data[s].size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < data[s].size(); ++i) {
                if (i) out << " ";
                out << num(px(data[s][i].u)) << "," << num(py(data[s][i].v));
            }
            out << "\"/>\n";
        }
        for (const Pt& p : data[s])
            out << "<circle cx=\"" << num(px(p.u)) << "\" cy=\"" << num(py(p.v))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << num(kRight - 4) << "\" y=\""
            << num(kTop + 16 + 16 * static_cast<double>(s))
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\""
            << color << "\">" << escape(spec.series[s].name) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_svg_plot(const PlotSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render_svg_plot(spec);
}

}  // namespace entroflow
