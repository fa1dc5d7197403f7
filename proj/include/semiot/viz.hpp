// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal output rendering: a self-contained two-panel SVG for the two-atom
// experiment and binary PGM montages for image-shaped samples. No plotting
// dependency; elements are emitted directly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "semiot/common.hpp"

namespace semiot {

namespace detail {

struct PanelBox {
    double x0, y0, w, h;          // pixel rect
    double dx0, dx1, dy0, dy1;    // data rect

    double px(double x) const { return x0 + (x - dx0) / (dx1 - dx0) * w; }
    double py(double y) const { return y0 + h - (y - dy0) / (dy1 - dy0) * h; }
};

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

inline void svg_panel(std::string& out, const PanelBox& b, const std::string& title,
                      const std::vector<Point>& traj, const Point& y1, const Point& y2,
                      const Point& theta_star) {
    out += "<rect x=\"" + svg_num(b.x0) + "\" y=\"" + svg_num(b.y0) + "\" width=\"" +
           svg_num(b.w) + "\" height=\"" + svg_num(b.h) +
           "\" fill=\"white\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + svg_num(b.x0 + b.w / 2) + "\" y=\"" + svg_num(b.y0 - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title +
           "</text>\n";
    // Axis ticks: 5 per axis, light grid.
    for (int t = 0; t <= 4; ++t) {
        const double fx = b.dx0 + (b.dx1 - b.dx0) * t / 4.0;
        const double fy = b.dy0 + (b.dy1 - b.dy0) * t / 4.0;
        const double px = b.px(fx), py = b.py(fy);
        out += "<line x1=\"" + svg_num(px) + "\" y1=\"" + svg_num(b.y0) + "\" x2=\"" + svg_num(px) +
               "\" y2=\"" + svg_num(b.y0 + b.h) + "\" stroke=\"#eee\"/>\n";
        out += "<line x1=\"" + svg_num(b.x0) + "\" y1=\"" + svg_num(py) + "\" x2=\"" +
               svg_num(b.x0 + b.w) + "\" y2=\"" + svg_num(py) + "\" stroke=\"#eee\"/>\n";
        out += "<text x=\"" + svg_num(px) + "\" y=\"" + svg_num(b.y0 + b.h + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(fx) + "</text>\n";
        out += "<text x=\"" + svg_num(b.x0 - 6) + "\" y=\"" + svg_num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(fy) + "</text>\n";
    }
    if (!traj.empty()) {
        out += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.2\" points=\"";
        for (const Point& p : traj) out += svg_num(b.px(p[0])) + "," + svg_num(b.py(p[1])) + " ";
        out += "\"/>\n";
        out += "<circle cx=\"" + svg_num(b.px(traj.front()[0])) + "\" cy=\"" +
               svg_num(b.py(traj.front()[1])) +
               "\" r=\"3.5\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n";
        out += "<circle cx=\"" + svg_num(b.px(traj.back()[0])) + "\" cy=\"" +
               svg_num(b.py(traj.back()[1])) + "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    }
    auto marker = [&](const Point& p, const char* color, const char* label, double dy) {
        out += "<circle cx=\"" + svg_num(b.px(p[0])) + "\" cy=\"" + svg_num(b.py(p[1])) +
               "\" r=\"4\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + svg_num(b.px(p[0]) + 8) + "\" y=\"" + svg_num(b.py(p[1]) + dy) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" + label +
               "</text>\n";
    };
    marker(y1, "#c0392b", "y1", 4);
    marker(y2, "#c0392b", "y2", 4);
    // theta* as a cross.
    const double cx = b.px(theta_star[0]), cy = b.py(theta_star[1]);
    out += "<line x1=\"" + svg_num(cx - 5) + "\" y1=\"" + svg_num(cy - 5) + "\" x2=\"" +
           svg_num(cx + 5) + "\" y2=\"" + svg_num(cy + 5) +
           "\" stroke=\"#27863b\" stroke-width=\"2\"/>\n";
    out += "<line x1=\"" + svg_num(cx - 5) + "\" y1=\"" + svg_num(cy + 5) + "\" x2=\"" +
           svg_num(cx + 5) + "\" y2=\"" + svg_num(cy - 5) +
           "\" stroke=\"#27863b\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + svg_num(cx + 8) + "\" y=\"" + svg_num(cy - 6) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#27863b\">theta*</text>\n";
}

inline PanelBox fit_panel(double x0, double y0, double w, double h, const std::vector<Point>& traj,
                          const Point& y1, const Point& y2, const Point& theta_star) {
    double lo_x = std::min({y1[0], y2[0], theta_star[0]});
    double hi_x = std::max({y1[0], y2[0], theta_star[0]});
    double lo_y = std::min({y1[1], y2[1], theta_star[1]});
    double hi_y = std::max({y1[1], y2[1], theta_star[1]});
    for (const Point& p : traj) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    const double pad_x = std::max(0.1 * (hi_x - lo_x), 0.1);
    const double pad_y = std::max(0.1 * (hi_y - lo_y), 0.1);
    return PanelBox{x0, y0, w, h, lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y};
}

}  // namespace detail

// Two panels: the unregularized trajectory (left) and the regularized one
// (right), with the target atoms and the optimum marked. Trajectories are
// sequences of 2-d parameter iterates.
inline void write_counterexample_svg(const std::string& path,
                                     const std::vector<Point>& traj_unreg,
                                     const std::vector<Point>& traj_reg, const Point& y1,
                                     const Point& y2, const Point& theta_star,
                                     const std::string& label_unreg = "unregularized (oscillates)",
                                     const std::string& label_reg = "regularized (converges)") {
    for (const Point* p : {&y1, &y2, &theta_star})
        if (p->size() != 2) throw dimension_error("write_counterexample_svg: points must be 2-d");
    for (const std::vector<Point>* t : {&traj_unreg, &traj_reg})
        for (const Point& p : *t)
            if (p.size() != 2)
                throw dimension_error("write_counterexample_svg: trajectories must be 2-d");

    std::string out;
    out.reserve(1 << 16);
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"920\" height=\"470\" "
           "viewBox=\"0 0 920 470\">\n";
    out += "<rect width=\"920\" height=\"470\" fill=\"white\"/>\n";
    const detail::PanelBox left =
        detail::fit_panel(60, 40, 380, 380, traj_unreg, y1, y2, theta_star);
    const detail::PanelBox right =
        detail::fit_panel(520, 40, 380, 380, traj_reg, y1, y2, theta_star);
    detail::svg_panel(out, left, label_unreg, traj_unreg, y1, y2, theta_star);
    detail::svg_panel(out, right, label_reg, traj_reg, y1, y2, theta_star);
    out += "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write SVG: " + path);
    f << out;
    if (!f) throw io_error("short write on SVG: " + path);
}

// Binary PGM (P5) montage: each point is a square grayscale image in [0,1],
// arranged row-major on a ceil(sqrt(count)) grid; unused cells stay black.
inline void write_pgm_montage(const std::string& path, const std::vector<Point>& points) {
    if (points.empty()) throw error("write_pgm_montage: no points");
    const std::size_t dim = points.front().size();
    const std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(double(dim))));
    if (side * side != dim)
        throw dimension_error("write_pgm_montage: point dimension " + std::to_string(dim) +
                              " is not a perfect square");
    const std::size_t grid =
        static_cast<std::size_t>(std::ceil(std::sqrt(double(points.size()))));
    const std::size_t w = grid * side;
    std::vector<unsigned char> img(w * w, 0);
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k].size() != dim)
            throw dimension_error("write_pgm_montage: inconsistent point dimensions");
        const std::size_t cr = k / grid, cc = k % grid;
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t c = 0; c < side; ++c) {
                const double v = std::clamp(points[k][r * side + c], 0.0, 1.0);
                img[(cr * side + r) * w + (cc * side + c)] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write PGM: " + path);
    f << "P5\n" << w << " " << w << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!f) throw io_error("short write on PGM: " + path);
}

}  // namespace semiot
