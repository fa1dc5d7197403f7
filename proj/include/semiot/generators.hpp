// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Parametric generators g_theta(z) with closed-form parameter VJPs
// (translation, affine, small MLPs), and a bias-corrected Adam optimizer.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semiot/common.hpp"
#include "semiot/rng.hpp"

namespace semiot {

using ParamVector = std::vector<double>;

enum class GeneratorKind { Translation, Affine, Mlp };
enum class Activation { Tanh, Softplus, Relu };

inline std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::Translation: return "translation";
        case GeneratorKind::Affine: return "affine";
        case GeneratorKind::Mlp: return "mlp";
    }
    return "?";
}

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Softplus: return "softplus";
        case Activation::Relu: return "relu";
    }
    return "?";
}

inline GeneratorKind generator_kind_from_string(const std::string& s) {
    if (s == "translation") return GeneratorKind::Translation;
    if (s == "affine") return GeneratorKind::Affine;
    if (s == "mlp") return GeneratorKind::Mlp;
    throw config_error("unknown generator kind: " + s);
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "softplus") return Activation::Softplus;
    if (s == "relu") return Activation::Relu;
    throw config_error("unknown activation: " + s);
}

namespace detail {

inline double act_value(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Softplus:
            // log(1+e^x), written to avoid overflow for large |x|.
            return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        case Activation::Relu: return x > 0.0 ? x : 0.0;
    }
    return 0.0;
}

// Derivative of the activation at pre-activation x. Relu at exactly 0 takes
// subgradient 0 and reports the kink.
inline double act_deriv(Activation a, double x, bool* at_kink) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::Softplus: return 1.0 / (1.0 + std::exp(-x));
        case Activation::Relu:
            if (x == 0.0 && at_kink) *at_kink = true;
            return x > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace detail

// A generator architecture. Parameters live in a flat vector owned by the
// caller; forward/vjp are pure.
//
// Parameter layouts:
//   Translation (dim d):      theta = t,              g(z) = z + t
//   Affine (d_z -> d_x):      theta = [A row-major | b], g(z) = A z + b
//   MLP (widths w0..wL):      per layer [W_l row-major | b_l], hidden layers
//                             pass through the activation, output is linear.
class Generator {
public:
    static Generator translation(std::size_t dim) {
        if (dim == 0) throw dimension_error("Generator: zero-dimensional translation");
        Generator g(GeneratorKind::Translation);
        g.widths_ = {dim, dim};
        return g;
    }

    static Generator affine(std::size_t d_z, std::size_t d_x) {
        if (d_z == 0 || d_x == 0) throw dimension_error("Generator: zero-dimensional affine map");
        Generator g(GeneratorKind::Affine);
        g.widths_ = {d_z, d_x};
        return g;
    }

    static Generator mlp(std::vector<std::size_t> widths, Activation act = Activation::Tanh) {
        if (widths.size() < 2) throw dimension_error("Generator: MLP needs at least two widths");
        for (std::size_t w : widths)
            if (w == 0) throw dimension_error("Generator: zero-width MLP layer");
        Generator g(GeneratorKind::Mlp);
        g.widths_ = std::move(widths);
        g.act_ = act;
        return g;
    }

    GeneratorKind kind() const { return kind_; }
    Activation activation() const { return act_; }
    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t input_dim() const { return widths_.front(); }
    std::size_t output_dim() const { return widths_.back(); }
    std::size_t layer_count() const { return widths_.size() - 1; }

    std::size_t param_count() const {
        switch (kind_) {
            case GeneratorKind::Translation: return widths_.back();
            case GeneratorKind::Affine: return widths_.back() * (widths_.front() + 1);
            case GeneratorKind::Mlp: {
                std::size_t n = 0;
                for (std::size_t l = 0; l + 1 < widths_.size(); ++l)
                    n += widths_[l + 1] * (widths_[l] + 1);
                return n;
            }
        }
        return 0;
    }

    // Offsets into the flat parameter vector for layer l (0-based). Valid for
    // Affine (layer 0) and MLP.
    std::size_t weight_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t l = 0; l < layer; ++l) off += widths_[l + 1] * (widths_[l] + 1);
        return off;
    }
    std::size_t bias_offset(std::size_t layer) const {
        return weight_offset(layer) + widths_[layer + 1] * widths_[layer];
    }

    // Deterministic initialization: weights uniform in +-1/sqrt(fan_in),
    // biases zero; Translation starts at the origin.
    ParamVector init_params(std::uint64_t seed) const {
        ParamVector theta(param_count(), 0.0);
        if (kind_ == GeneratorKind::Translation) return theta;
        RandomStream rs(seed, /*stream_key=*/0);
        const std::size_t layers = kind_ == GeneratorKind::Affine ? 1 : layer_count();
        for (std::size_t l = 0; l < layers; ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
            const std::size_t w_off = weight_offset(l);
            const std::size_t n_w = widths_[l + 1] * widths_[l];
            for (std::size_t i = 0; i < n_w; ++i) theta[w_off + i] = rs.uniform(-bound, bound);
        }
        return theta;
    }

    Point forward(const ParamVector& theta, const Point& z) const {
        check_shapes(theta, z);
        switch (kind_) {
            case GeneratorKind::Translation: {
                Point out(z);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += theta[i];
                return out;
            }
            case GeneratorKind::Affine:
                return affine_apply(theta, 0, z);
            case GeneratorKind::Mlp: {
                Point a = z;
                const std::size_t L = layer_count();
                for (std::size_t l = 0; l < L; ++l) {
                    a = affine_apply(theta, l, a);
                    if (l + 1 != L)
                        for (double& q : a) q = detail::act_value(act_, q);
                }
                return a;
            }
        }
        return {};
    }

    // Transpose-Jacobian product (d_theta g)^T v. For relu MLPs, *at_kink is
    // set when some pre-activation sits exactly at 0 (subgradient 0 used).
    ParamVector vjp(const ParamVector& theta, const Point& z, const Point& v,
                    bool* at_kink = nullptr) const {
        check_shapes(theta, z);
        if (v.size() != output_dim())
            throw dimension_error("Generator::vjp: cotangent has wrong dimension");
        if (at_kink) *at_kink = false;
        ParamVector grad(param_count(), 0.0);
        switch (kind_) {
            case GeneratorKind::Translation:
                // d_theta g = I.
                for (std::size_t i = 0; i < v.size(); ++i) grad[i] = v[i];
                return grad;
            case GeneratorKind::Affine:
                accumulate_affine_vjp(grad, 0, z, v);
                return grad;
            case GeneratorKind::Mlp: {
                // Forward pass keeping inputs and pre-activation derivatives.
                const std::size_t L = layer_count();
                std::vector<Point> inputs(L);  // activation entering layer l
                Point a = z;
                std::vector<Point> deriv(L);  // act'(pre) for hidden layers
                for (std::size_t l = 0; l < L; ++l) {
                    inputs[l] = a;
                    Point pre = affine_apply(theta, l, a);
                    if (l + 1 == L) {
                        a = std::move(pre);
                    } else {
                        deriv[l].resize(pre.size());
                        a.resize(pre.size());
                        for (std::size_t i = 0; i < pre.size(); ++i) {
                            deriv[l][i] = detail::act_deriv(act_, pre[i], at_kink);
                            a[i] = detail::act_value(act_, pre[i]);
                        }
                    }
                }
                // Reverse pass.
                Point delta = v;  // gradient w.r.t. layer output
                for (std::size_t l = L; l-- > 0;) {
                    if (l + 1 != L)
                        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= deriv[l][i];
                    accumulate_affine_vjp(grad, l, inputs[l], delta);
                    if (l > 0) delta = affine_backprop_input(theta, l, delta);
                }
                return grad;
            }
        }
        return grad;
    }

private:
    explicit Generator(GeneratorKind k) : kind_(k) {}

    void check_shapes(const ParamVector& theta, const Point& z) const {
        if (theta.size() != param_count())
            throw dimension_error("Generator: parameter vector has wrong length");
        if (z.size() != input_dim())
            throw dimension_error("Generator: latent point has wrong dimension");
    }

    // y = W_l x + b_l (no activation; callers apply it where needed).
    Point affine_apply(const ParamVector& theta, std::size_t layer, const Point& x) const {
        const std::size_t in = widths_[layer], out = widths_[layer + 1];
        const std::size_t w_off = weight_offset(layer), b_off = bias_offset(layer);
        Point y(out);
        for (std::size_t i = 0; i < out; ++i) {
            double s = theta[b_off + i];
            const std::size_t row = w_off + i * in;
            for (std::size_t j = 0; j < in; ++j) s += theta[row + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    // grad_W += delta x^T, grad_b += delta.
    void accumulate_affine_vjp(ParamVector& grad, std::size_t layer, const Point& x,
                               const Point& delta) const {
        const std::size_t in = widths_[layer], out = widths_[layer + 1];
        const std::size_t w_off = weight_offset(layer), b_off = bias_offset(layer);
        for (std::size_t i = 0; i < out; ++i) {
            const std::size_t row = w_off + i * in;
            for (std::size_t j = 0; j < in; ++j) grad[row + j] += delta[i] * x[j];
            grad[b_off + i] += delta[i];
        }
    }

    // W_l^T delta.
    Point affine_backprop_input(const ParamVector& theta, std::size_t layer,
                                const Point& delta) const {
        const std::size_t in = widths_[layer], out = widths_[layer + 1];
        const std::size_t w_off = weight_offset(layer);
        Point g(in, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            const std::size_t row = w_off + i * in;
            for (std::size_t j = 0; j < in; ++j) g[j] += theta[row + j] * delta[i];
        }
        return g;
    }

    GeneratorKind kind_;
    std::vector<std::size_t> widths_;  // {d, d} / {d_z, d_x} / MLP widths
    Activation act_ = Activation::Tanh;
};

inline Point forward(const Generator& gen, const ParamVector& theta, const Point& z) {
    return gen.forward(theta, z);
}

inline ParamVector vjp(const Generator& gen, const ParamVector& theta, const Point& z,
                       const Point& v, bool* at_kink = nullptr) {
    return gen.vjp(theta, z, v, at_kink);
}

// ----------------------------------------------------------------------------
// Adam
// ----------------------------------------------------------------------------

struct AdamState {
    std::vector<double> m;  // first moments
    std::vector<double> v;  // second moments
    std::uint64_t step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(std::size_t dim, double lr = 1e-4) {
        AdamState s;
        s.m.assign(dim, 0.0);
        s.v.assign(dim, 0.0);
        s.lr = lr;
        return s;
    }
};

// Standard bias-corrected Adam update. At t=1 the corrected moments are g and
// g^2, so theta' = theta - lr * g / (|g| + eps) elementwise.
inline std::pair<ParamVector, AdamState> adam_step(const AdamState& state, const ParamVector& theta,
                                                   const ParamVector& grad) {
    if (state.m.size() != theta.size() || grad.size() != theta.size())
        throw dimension_error("adam_step: shape mismatch");
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i]))
            throw numeric_error("adam_step: non-finite gradient at component " + std::to_string(i));
    }
    AdamState s = state;
    s.step += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    ParamVector out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
        const double mhat = s.m[i] / bc1;
        const double vhat = s.v[i] / bc2;
        out[i] = theta[i] - s.lr * mhat / (std::sqrt(vhat) + s.eps);
        if (!std::isfinite(out[i]))
            throw numeric_error("adam_step: non-finite parameter at component " + std::to_string(i));
    }
    return {std::move(out), std::move(s)};
}

}  // namespace semiot
