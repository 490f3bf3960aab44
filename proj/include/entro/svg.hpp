// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "entro/types.hpp"

// Minimal dependency-free SVG writers for the two report charts.

namespace entro::svg {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

struct Bar {
    std::string label;
    double value = 0.0;  // expected in [0, 1]
};

inline void write_bar_chart(const std::filesystem::path& path, std::span<const Bar> bars, const std::string& title,
                            const std::string& y_label) {
    const double width = 640.0, height = 360.0, left = 60.0, bottom = 300.0, top = 40.0;
    std::ofstream out(path);
    if (!out) throw error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << (bottom + top) / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 "
        << (bottom + top) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << width - 20 << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    if (!bars.empty()) {
        const double span = (width - 20.0 - left) / static_cast<double>(bars.size());
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const double v = std::isfinite(bars[i].value) ? std::min(std::max(bars[i].value, 0.0), 1.0) : 0.0;
            const double h = (bottom - top) * v;
            const double x = left + span * static_cast<double>(i) + span * 0.1;
            out << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(bottom - h) << "\" width=\""
                << detail::num(span * 0.8) << "\" height=\"" << detail::num(h) << "\" fill=\"#4878a8\"/>\n";
            out << "<text x=\"" << detail::num(x + span * 0.4) << "\" y=\"" << bottom + 14
                << "\" font-size=\"9\" text-anchor=\"middle\">" << bars[i].label << "</text>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw error("write failed for " + path.string());
}

struct CurvePoint {
    std::string label;
    double value = 0.0;
    double err = 0.0;  // half-height of the error bar
};

inline void write_curve_chart(const std::filesystem::path& path, std::span<const CurvePoint> points,
                              const std::string& title, const std::string& y_label) {
    const double width = 640.0, height = 360.0, left = 60.0, bottom = 300.0, top = 40.0;
    double lo = 1.0, hi = 0.0;
    for (const auto& p : points) {
        lo = std::min(lo, p.value - p.err);
        hi = std::max(hi, p.value + p.err);
    }
    if (points.empty() || !(hi > lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    const double pad = 0.1 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto ty = [&](double v) { return bottom - (bottom - top) * (v - lo) / (hi - lo); };

    std::ofstream out(path);
    if (!out) throw error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << (bottom + top) / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 "
        << (bottom + top) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << width - 20 << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    if (!points.empty()) {
        const double span = (width - 40.0 - left) / static_cast<double>(points.size());
        std::string polyline;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double x = left + span * (static_cast<double>(i) + 0.5);
            const double y = ty(points[i].value);
            polyline += detail::num(x) + "," + detail::num(y) + " ";
            out << "<line x1=\"" << detail::num(x) << "\" y1=\"" << detail::num(ty(points[i].value - points[i].err))
                << "\" x2=\"" << detail::num(x) << "\" y2=\"" << detail::num(ty(points[i].value + points[i].err))
                << "\" stroke=\"#a04040\"/>\n";
            out << "<circle cx=\"" << detail::num(x) << "\" cy=\"" << detail::num(y)
                << "\" r=\"3\" fill=\"#4878a8\"/>\n";
            out << "<text x=\"" << detail::num(x) << "\" y=\"" << bottom + 14
                << "\" font-size=\"10\" text-anchor=\"middle\">" << points[i].label << "</text>\n";
        }
        out << "<polyline points=\"" << polyline << "\" fill=\"none\" stroke=\"#4878a8\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw error("write failed for " + path.string());
}

}  // namespace entro::svg
