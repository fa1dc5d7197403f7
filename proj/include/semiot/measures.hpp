// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Points, discrete measures, ground costs, latent samplers and dataset
// ingestion (CSV and IDX).
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "semiot/common.hpp"
#include "semiot/rng.hpp"

namespace semiot {

// ----------------------------------------------------------------------------
// DiscreteMeasure
// ----------------------------------------------------------------------------

// A probability measure with finite support: weights are nonnegative and sum
// to one within 1e-12; all support points share one dimension.
struct DiscreteMeasure {
    std::vector<Point> support;
    std::vector<double> weights;

    std::size_t size() const { return support.size(); }
    std::size_t dim() const { return support.empty() ? 0 : support.front().size(); }

    static DiscreteMeasure uniform(std::vector<Point> points) {
        const std::size_t n = points.size();
        std::vector<double> w(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
        return weighted(std::move(points), std::move(w));
    }

    static DiscreteMeasure weighted(std::vector<Point> points, std::vector<double> w) {
        DiscreteMeasure m{std::move(points), std::move(w)};
        m.validate();
        return m;
    }

    // Rescales raw nonnegative weights to the simplex before validating.
    static DiscreteMeasure normalized(std::vector<Point> points, std::vector<double> w) {
        const double s = kahan_sum(w);
        if (!(s > 0.0)) throw error("DiscreteMeasure: weight sum must be positive");
        for (double& x : w) x /= s;
        return weighted(std::move(points), std::move(w));
    }

    void validate() const {
        if (support.empty()) throw error("DiscreteMeasure: empty support");
        if (weights.size() != support.size())
            throw dimension_error("DiscreteMeasure: weights/support size mismatch");
        const std::size_t d = support.front().size();
        if (d == 0) throw dimension_error("DiscreteMeasure: zero-dimensional points");
        for (const Point& p : support) {
            if (p.size() != d) throw dimension_error("DiscreteMeasure: inconsistent point dimensions");
            if (!all_finite(p)) throw error("DiscreteMeasure: non-finite support point");
        }
        for (double w : weights) {
            if (!(w >= 0.0)) throw error("DiscreteMeasure: negative weight");
        }
        const double s = kahan_sum(weights);
        if (std::abs(s - 1.0) > 1e-12)
            throw error("DiscreteMeasure: weights sum to " + fmt17(s) + ", expected 1");
    }
};

// ----------------------------------------------------------------------------
// CostFunction
// ----------------------------------------------------------------------------

enum class CostKind { SquaredEuclidean, PowerNorm };

// Ground cost c(x,y): squared Euclidean distance or ||x-y||^p for p >= 1.
class CostFunction {
public:
    static CostFunction squared_euclidean() { return CostFunction(CostKind::SquaredEuclidean, 2.0); }

    static CostFunction power_norm(double p) {
        if (!(p >= 1.0)) throw error("CostFunction: power norm requires p >= 1");
        return CostFunction(CostKind::PowerNorm, p);
    }

    CostKind kind() const { return kind_; }
    double power() const { return p_; }

    double value(const Point& x, const Point& y) const {
        require_same_dim(x, y, "cost_value");
        const double s = sq_dist(x, y);
        if (kind_ == CostKind::SquaredEuclidean) return s;
        if (p_ == 2.0) return s;
        return std::pow(std::sqrt(s), p_);
    }

    // Gradient in the first argument. PowerNorm with p < 2 is non-smooth at
    // x == y; there the gradient is defined as zero and *non_smooth is set.
    Point grad_x(const Point& x, const Point& y, bool* non_smooth = nullptr) const {
        require_same_dim(x, y, "cost_grad_x");
        const std::size_t d = x.size();
        Point g(d, 0.0);
        if (non_smooth) *non_smooth = false;
        if (kind_ == CostKind::SquaredEuclidean || p_ == 2.0) {
            for (std::size_t i = 0; i < d; ++i) g[i] = 2.0 * (x[i] - y[i]);
            return g;
        }
        const double r = dist(x, y);
        if (r == 0.0) {
            // p > 2: the gradient limit is zero. p < 2: kink.
            if (p_ < 2.0 && non_smooth) *non_smooth = true;
            return g;
        }
        const double scale = p_ * std::pow(r, p_ - 2.0);
        for (std::size_t i = 0; i < d; ++i) g[i] = scale * (x[i] - y[i]);
        return g;
    }

private:
    CostFunction(CostKind k, double p) : kind_(k), p_(p) {}

    CostKind kind_;
    double p_;
};

inline double cost_value(const CostFunction& c, const Point& x, const Point& y) {
    return c.value(x, y);
}

inline Point cost_grad_x(const CostFunction& c, const Point& x, const Point& y,
                         bool* non_smooth = nullptr) {
    return c.grad_x(x, y, non_smooth);
}

// ----------------------------------------------------------------------------
// LatentSampler
// ----------------------------------------------------------------------------

enum class LatentKind { Dirac, Gaussian, Uniform };

// Seed-driven latent distribution. Batches are keyed by (seed, stream_key):
// the same pair always reproduces the same batch, and distinct keys give
// independent streams.
class LatentSampler {
public:
    static LatentSampler dirac(Point at, std::uint64_t seed = 0) {
        if (at.empty()) throw dimension_error("LatentSampler: zero-dimensional point");
        LatentSampler s(LatentKind::Dirac, seed);
        s.a_ = std::move(at);
        s.b_.assign(s.a_.size(), 0.0);
        return s;
    }

    static LatentSampler gaussian(Point mean, Point stddev, std::uint64_t seed) {
        require_same_dim(mean, stddev, "LatentSampler::gaussian");
        if (mean.empty()) throw dimension_error("LatentSampler: zero-dimensional point");
        for (double s : stddev)
            if (!(s >= 0.0)) throw error("LatentSampler: negative stddev");
        LatentSampler s(LatentKind::Gaussian, seed);
        s.a_ = std::move(mean);
        s.b_ = std::move(stddev);
        return s;
    }

    static LatentSampler standard_gaussian(std::size_t dim, std::uint64_t seed) {
        return gaussian(Point(dim, 0.0), Point(dim, 1.0), seed);
    }

    static LatentSampler uniform_box(Point lo, Point hi, std::uint64_t seed) {
        require_same_dim(lo, hi, "LatentSampler::uniform_box");
        if (lo.empty()) throw dimension_error("LatentSampler: zero-dimensional point");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw error("LatentSampler: box lower bound exceeds upper bound");
        LatentSampler s(LatentKind::Uniform, seed);
        s.a_ = std::move(lo);
        s.b_ = std::move(hi);
        return s;
    }

    LatentKind kind() const { return kind_; }
    std::size_t dim() const { return a_.size(); }
    std::uint64_t seed() const { return seed_; }
    const Point& param_a() const { return a_; }  // point / mean / lower bound
    const Point& param_b() const { return b_; }  // unused / stddev / upper bound

    LatentSampler with_seed(std::uint64_t seed) const {
        LatentSampler s = *this;
        s.seed_ = seed;
        return s;
    }

    std::vector<Point> sample(std::size_t count, std::uint64_t stream_key) const {
        std::vector<Point> out;
        out.reserve(count);
        if (kind_ == LatentKind::Dirac) {
            for (std::size_t k = 0; k < count; ++k) out.push_back(a_);
            return out;
        }
        RandomStream rs(seed_, stream_key);
        const std::size_t d = dim();
        for (std::size_t k = 0; k < count; ++k) {
            Point p(d);
            for (std::size_t i = 0; i < d; ++i) {
                p[i] = kind_ == LatentKind::Gaussian ? a_[i] + b_[i] * rs.gaussian()
                                                     : rs.uniform(a_[i], b_[i]);
            }
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    LatentSampler(LatentKind k, std::uint64_t seed) : kind_(k), seed_(seed) {}

    LatentKind kind_;
    std::uint64_t seed_;
    Point a_, b_;
};

inline std::vector<Point> sample_latent(const LatentSampler& s, std::size_t count,
                                        std::uint64_t stream_key) {
    return s.sample(count, stream_key);
}

// ----------------------------------------------------------------------------
// Dataset loading
// ----------------------------------------------------------------------------

enum class DatasetFormat { Csv, Idx };

// CSV: one point per line, comma-separated decimal fields, no header.
inline DiscreteMeasure load_csv_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open dataset file: " + path);
    std::vector<Point> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
            throw parse_error(path + ": empty line " + std::to_string(line_no));
        }
        Point p;
        const char* begin = line.data();
        const char* end = begin + line.size();
        const char* cur = begin;
        std::size_t field = 0;
        while (true) {
            ++field;
            const char* field_end = std::find(cur, end, ',');
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cur, field_end, v);
            if (ec != std::errc() || ptr != field_end) {
                throw parse_error(path + ": line " + std::to_string(line_no) + ", field " +
                                  std::to_string(field) + ": non-numeric cell '" +
                                  std::string(cur, field_end) + "'");
            }
            p.push_back(v);
            if (field_end == end) break;
            cur = field_end + 1;
        }
        if (!points.empty() && p.size() != points.front().size()) {
            throw parse_error(path + ": line " + std::to_string(line_no) + ": expected " +
                              std::to_string(points.front().size()) + " fields, got " +
                              std::to_string(p.size()));
        }
        points.push_back(std::move(p));
    }
    if (points.empty()) throw parse_error(path + ": no data rows");
    return DiscreteMeasure::uniform(std::move(points));
}

namespace detail {

inline std::uint32_t read_be_u32(const std::vector<unsigned char>& buf, std::size_t off,
                                 const std::string& path) {
    if (off + 4 > buf.size()) {
        throw parse_error(path + ": truncated header at byte offset " + std::to_string(off));
    }
    return (std::uint32_t(buf[off]) << 24) | (std::uint32_t(buf[off + 1]) << 16) |
           (std::uint32_t(buf[off + 2]) << 8) | std::uint32_t(buf[off + 3]);
}

}  // namespace detail

// IDX (big-endian): magic 0x00000803 for u8 image tensors, 0x00000801 for u8
// label vectors. Images are flattened row-major and scaled to [0,1].
inline DiscreteMeasure load_idx_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open dataset file: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    const std::uint32_t magic = detail::read_be_u32(buf, 0, path);
    std::size_t n = 0, point_dim = 0, data_off = 0;
    bool scale = false;
    if (magic == 0x00000803u) {
        const std::uint32_t count = detail::read_be_u32(buf, 4, path);
        const std::uint32_t rows = detail::read_be_u32(buf, 8, path);
        const std::uint32_t cols = detail::read_be_u32(buf, 12, path);
        n = count;
        point_dim = std::size_t(rows) * cols;
        data_off = 16;
        scale = true;  // pixels
    } else if (magic == 0x00000801u) {
        n = detail::read_be_u32(buf, 4, path);
        point_dim = 1;
        data_off = 8;
        scale = false;  // labels kept as raw values
    } else {
        throw parse_error(path + ": bad magic number 0x" + [&] {
            char b[16];
            std::snprintf(b, sizeof(b), "%08x", magic);
            return std::string(b);
        }() + " at byte offset 0");
    }
    if (n == 0 || point_dim == 0) throw parse_error(path + ": empty tensor");
    const std::size_t need = data_off + n * point_dim;
    if (buf.size() < need) {
        throw parse_error(path + ": truncated payload: need " + std::to_string(need) +
                          " bytes, file ends at byte offset " + std::to_string(buf.size()));
    }
    std::vector<Point> points;
    points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Point p(point_dim);
        const std::size_t base = data_off + k * point_dim;
        for (std::size_t i = 0; i < point_dim; ++i) {
            const double raw = static_cast<double>(buf[base + i]);
            p[i] = scale ? raw / 255.0 : raw;
        }
        points.push_back(std::move(p));
    }
    return DiscreteMeasure::uniform(std::move(points));
}

inline DiscreteMeasure load_dataset(const std::string& path, DatasetFormat format) {
    return format == DatasetFormat::Csv ? load_csv_dataset(path) : load_idx_dataset(path);
}

}  // namespace semiot
