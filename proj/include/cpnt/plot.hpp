// plot.hpp
// Minimal SVG line plots: one series per file, optional log-x axis. The
// output is a pure function of the CSV text and the options.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "cpnt/core.hpp"

namespace cpnt {

struct PlotOptions {
    std::string title;
    std::string x_column = "x";
    std::string y_column;  // empty: second column
    bool log_x = false;
    int width = 800;
    int height = 500;
    std::size_t max_points = 4000;  // thinned evenly beyond this
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

// 1, 2, 5 steps covering [lo, hi] with about n ticks
inline std::vector<double> nice_ticks(double lo, double hi, int n) {
    std::vector<double> out;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

}  // namespace detail

// CSV with a header row; columns are chosen by name.
inline std::vector<std::pair<double, double>> read_csv_series(const std::string& csv, const std::string& x_col, const std::string& y_col) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("plot: empty CSV");
    std::vector<std::string> head;
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) head.push_back(cell);
    }
    auto find = [&](const std::string& name, std::size_t fallback) {
        if (name.empty()) {
            if (fallback >= head.size()) throw ParseError("plot: too few columns");
            return fallback;
        }
        const auto it = std::find(head.begin(), head.end(), name);
        if (it == head.end()) throw ParseError("plot: no column '" + name + "'");
        return static_cast<std::size_t>(it - head.begin());
    };
    const std::size_t xi = find(x_col, 0), yi = find(y_col, 1);
    std::vector<std::pair<double, double>> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream r(line);
        std::string cell;
        while (std::getline(r, cell, ',')) cells.push_back(cell);
        if (cells.size() <= std::max(xi, yi)) throw ParseError("plot: short CSV row");
        pts.emplace_back(std::stod(cells[xi]), std::stod(cells[yi]));
    }
    return pts;
}

inline std::string svg_line_plot(const std::string& csv, const PlotOptions& opt) {
    auto pts = read_csv_series(csv, opt.x_column, opt.y_column);
    if (opt.log_x) pts.erase(std::remove_if(pts.begin(), pts.end(), [](const auto& p) { return !(p.first > 0); }), pts.end());
    if (pts.size() > opt.max_points) {
        std::vector<std::pair<double, double>> thin;
        for (std::size_t i = 0; i < opt.max_points; ++i) thin.push_back(pts[i * (pts.size() - 1) / (opt.max_points - 1)]);
        pts = std::move(thin);
    }
    const double ml = 80, mr = 20, mt = 40, mb = 50;
    const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
    auto fx = [&](double x) { return opt.log_x ? std::log10(x) : x; };
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty()) {
        x0 = x1 = fx(pts[0].first);
        y0 = y1 = pts[0].second;
        for (const auto& [x, y] : pts) {
            x0 = std::min(x0, fx(x));
            x1 = std::max(x1, fx(x));
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = (y1 - y0) * 0.05;
    y0 -= pad;
    y1 += pad;
    auto X = [&](double x) { return ml + (fx(x) - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return mt + (y1 - y) / (y1 - y0) * ph; };
    using detail::svg_num;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" viewBox=\"0 0 "
      << opt.width << " " << opt.height << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << svg_num(opt.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::xml_escape(opt.title) << "</text>\n";
    o << "<rect x=\"" << svg_num(ml) << "\" y=\"" << svg_num(mt) << "\" width=\"" << svg_num(pw) << "\" height=\"" << svg_num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : detail::nice_ticks(y0, y1, 6)) {
        o << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(Y(t)) << "\" x2=\"" << svg_num(ml + pw) << "\" y2=\"" << svg_num(Y(t))
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << svg_num(ml - 6) << "\" y=\"" << svg_num(Y(t) + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << detail::tick_label(t) << "</text>\n";
    }
    std::vector<double> xt;
    if (opt.log_x) {
        for (double e = std::ceil(x0); e <= x1 + 1e-12; e += 1) xt.push_back(e);
    } else {
        xt = detail::nice_ticks(x0, x1, 6);
    }
    for (double t : xt) {
        const double px = ml + (t - x0) / (x1 - x0) * pw;
        o << "<line x1=\"" << svg_num(px) << "\" y1=\"" << svg_num(mt) << "\" x2=\"" << svg_num(px) << "\" y2=\"" << svg_num(mt + ph)
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << svg_num(px) << "\" y=\"" << svg_num(mt + ph + 18) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << (opt.log_x ? "1e" + detail::tick_label(t) : detail::tick_label(t)) << "</text>\n";
    }
    if (y0 < 0 && y1 > 0)
        o << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(Y(0)) << "\" x2=\"" << svg_num(ml + pw) << "\" y2=\"" << svg_num(Y(0))
          << "\" stroke=\"#888\"/>\n";
    o << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) o << (i ? " " : "") << svg_num(X(pts[i].first)) << "," << svg_num(Y(pts[i].second));
    o << "\"/>\n";
    o << "<text x=\"" << svg_num(ml + pw / 2) << "\" y=\"" << svg_num(opt.height - 10.0) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::xml_escape(opt.x_column) << (opt.log_x ? " (log scale)" : "") << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace cpnt
