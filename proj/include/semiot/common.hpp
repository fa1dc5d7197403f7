// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiot {

// A point in feature space. Dual potentials and flattened parameter vectors
// reuse the same representation.
using Point = std::vector<double>;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mismatched sizes between points, measures, potentials or parameters.
struct dimension_error : error {
    using error::error;
};

// Malformed input data; the message names the offending line or byte offset.
struct parse_error : error {
    using error::error;
};

// Non-finite value produced during iteration; the message names the step.
struct numeric_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

// ----------------------------------------------------------------------------
// Small vector helpers
// ----------------------------------------------------------------------------

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void require_same_dim(const Point& x, const Point& y, const char* what) {
    if (x.size() != y.size()) {
        throw dimension_error(std::string(what) + ": dimension mismatch (" +
                              std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sq_norm(const std::vector<double>& a) { return dot(a, a); }

inline double norm(const std::vector<double>& a) { return std::sqrt(sq_norm(a)); }

inline double sq_dist(const Point& x, const Point& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& x, const Point& y) { return std::sqrt(sq_dist(x, y)); }

// Compensated summation; keeps the weight-sum check meaningful for large n.
inline double kahan_sum(const std::vector<double>& v) {
    double s = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return s;
}

inline double linf_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// 17 significant digits: enough to round-trip any double through text.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace semiot
