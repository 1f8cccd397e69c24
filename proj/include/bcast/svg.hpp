#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcast {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

namespace detail {

inline std::string fmt_num(double v, const char* spec = "%g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Largest 1/2/5 * 10^k step that yields at least ~5 ticks.
inline double nice_step(double range) {
    double raw = range / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {5.0, 2.0, 1.0})
        if (mult * mag <= raw) return mult * mag;
    return mag;
}

// Keeps the visual envelope of a dense series: one min and one max point per
// bucket, in sample order. Chattering signals keep their band this way.
inline void decimate(const std::vector<double>& x, const std::vector<double>& y,
                     std::vector<double>& out_x, std::vector<double>& out_y) {
    const size_t n = x.size();
    const size_t buckets = 2000;
    if (n <= 2 * buckets) {
        out_x = x;
        out_y = y;
        return;
    }
    for (size_t b = 0; b < buckets; ++b) {
        size_t lo = b * n / buckets, hi = (b + 1) * n / buckets;
        if (lo >= hi) continue;
        size_t imin = lo, imax = lo;
        for (size_t i = lo; i < hi; ++i) {
            if (y[i] < y[imin]) imin = i;
            if (y[i] > y[imax]) imax = i;
        }
        size_t first = std::min(imin, imax), second = std::max(imin, imax);
        out_x.push_back(x[first]);
        out_y.push_back(y[first]);
        if (second != first) {
            out_x.push_back(x[second]);
            out_y.push_back(y[second]);
        }
    }
}

}  // namespace detail

// Renders a fixed-layout line chart. Series are drawn in order; dashed
// styling distinguishes the second half of an agent pool.
inline std::string render_svg_plot(const std::string& title, const std::string& x_label,
                                   const std::string& y_label,
                                   const std::vector<PlotSeries>& series) {
    if (series.empty()) throw std::invalid_argument("svg plot: no series");
    const double W = 960, H = 540, ml = 72, mr = 170, mt = 48, mb = 56;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw std::invalid_argument("svg plot: series \"" + s.label + "\" is empty or ragged");
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmin == xmax) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymin == ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    double ypad = 0.04 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

    std::string svg;
    svg.reserve(1 << 16);
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" "
           "font-family=\"sans-serif\" font-size=\"13\">\n";
    svg += "<rect width=\"960\" height=\"540\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::fmt_num(ml + pw / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";

    // gridlines and ticks
    double xstep = detail::nice_step(xmax - xmin), ystep = detail::nice_step(ymax - ymin);
    for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-12 * xstep; v += xstep) {
        std::string X = detail::fmt_num(px(v), "%.2f");
        svg += "<line x1=\"" + X + "\" y1=\"" + detail::fmt_num(mt, "%.2f") + "\" x2=\"" + X +
               "\" y2=\"" + detail::fmt_num(mt + ph, "%.2f") + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + X + "\" y=\"" + detail::fmt_num(mt + ph + 18, "%.2f") +
               "\" text-anchor=\"middle\">" + detail::fmt_num(v) + "</text>\n";
    }
    for (double v = std::ceil(ymin / ystep) * ystep; v <= ymax + 1e-12 * ystep; v += ystep) {
        std::string Y = detail::fmt_num(py(v), "%.2f");
        svg += "<line x1=\"" + detail::fmt_num(ml, "%.2f") + "\" y1=\"" + Y + "\" x2=\"" +
               detail::fmt_num(ml + pw, "%.2f") + "\" y2=\"" + Y + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::fmt_num(ml - 8, "%.2f") + "\" y=\"" + Y +
               "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + detail::fmt_num(v) +
               "</text>\n";
    }
    svg += "<rect x=\"" + detail::fmt_num(ml, "%.2f") + "\" y=\"" + detail::fmt_num(mt, "%.2f") +
           "\" width=\"" + detail::fmt_num(pw, "%.2f") + "\" height=\"" +
           detail::fmt_num(ph, "%.2f") + "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + detail::fmt_num(ml + pw / 2) + "\" y=\"" + detail::fmt_num(H - 14) +
           "\" text-anchor=\"middle\">" + x_label + "</text>\n";
    svg += "<text x=\"18\" y=\"" + detail::fmt_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           detail::fmt_num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    for (const auto& s : series) {
        std::vector<double> dx, dy;
        detail::decimate(s.x, s.y, dx, dy);
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.2\"";
        if (s.dashed) svg += " stroke-dasharray=\"6 4\"";
        svg += " points=\"";
        for (size_t i = 0; i < dx.size(); ++i) {
            if (i) svg += ' ';
            svg += detail::fmt_num(px(dx[i]), "%.2f");
            svg += ',';
            svg += detail::fmt_num(py(dy[i]), "%.2f");
        }
        svg += "\"/>\n";
    }

    double ly = mt + 6;
    for (const auto& s : series) {
        std::string Y = detail::fmt_num(ly + 5, "%.2f");
        svg += "<line x1=\"" + detail::fmt_num(ml + pw + 12, "%.2f") + "\" y1=\"" + Y + "\" x2=\"" +
               detail::fmt_num(ml + pw + 40, "%.2f") + "\" y2=\"" + Y + "\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        svg += "<text x=\"" + detail::fmt_num(ml + pw + 46, "%.2f") + "\" y=\"" +
               detail::fmt_num(ly + 9, "%.2f") + "\">" + s.label + "</text>\n";
        ly += 18;
    }
    svg += "</svg>\n";
    return svg;
}

// Standard palette for up to ten agents.
inline const char* agent_color(int i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[static_cast<size_t>(i) % 10];
}

}  // namespace bcast
