// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Semi-dual machinery for entropic optimal transport against a discrete
// target: c-transform, smoothed c,lambda-transform, soft assignment weights
// and the semi-dual objective with its ascent direction.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "semiot/common.hpp"
#include "semiot/measures.hpp"

namespace semiot {

// One real value per atom of the discrete target; defined up to an additive
// constant.
using DualPotential = std::vector<double>;

struct CTransformResult {
    double value;
    std::size_t argmin;  // index of the attaining atom (smallest on ties)
};

// Hard c-transform  psi^c(x) = min_i [ c(x, y_i) - psi_i ].
// Ties are broken toward the smallest index, so the argmin identifies the
// Laguerre cell of x deterministically.
inline CTransformResult c_transform(const std::vector<double>& psi, const Point& x,
                                    const DiscreteMeasure& nu, const CostFunction& cost) {
    if (psi.size() != nu.size())
        throw dimension_error("c_transform: psi size does not match target support");
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double v = cost.value(x, nu.support[i]) - psi[i];
        if (v < best) {
            best = v;
            arg = i;
        }
    }
    return {best, arg};
}

namespace detail {

// Softmax weights and log-sum-exp over s_i = (psi_i - c_i)/lambda from
// precomputed costs; shared by the transform, eta weights and the batched
// solver. Writes eta (normalized, sums to 1) and returns
//   lse = max_i s'_i + log sum_i w_i exp(s_i - max_i s'_i)
// where s'_i = s_i + log w_i ranks the actual summands (atoms with w_i = 0
// are skipped entirely). The shift keeps every exponent <= 0.
inline double soft_assign_from_costs(const std::vector<double>& psi,
                                     const std::vector<double>& costs,
                                     const std::vector<double>& weights, double lambda,
                                     std::vector<double>& eta) {
    const std::size_t n = psi.size();
    eta.assign(n, 0.0);
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] <= 0.0) continue;
        const double s = (psi[i] - costs[i]) / lambda + std::log(weights[i]);
        shift = std::max(shift, s);
    }
    if (!std::isfinite(shift)) throw numeric_error("soft_assign: no atom carries mass");
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] <= 0.0) continue;
        const double e = std::exp((psi[i] - costs[i]) / lambda + std::log(weights[i]) - shift);
        eta[i] = e;
        z += e;
    }
    for (double& e : eta) e /= z;
    return shift + std::log(z);
}

inline std::vector<double> costs_to_support(const Point& x, const DiscreteMeasure& nu,
                                            const CostFunction& cost) {
    std::vector<double> c(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) c[i] = cost.value(x, nu.support[i]);
    return c;
}

}  // namespace detail

// Smoothed transform  psi^{c,lambda}(x) = -lambda log sum_i w_i exp((psi_i - c(x,y_i))/lambda),
// evaluated through a max-shifted log-sum-exp. Requires lambda > 0.
inline double c_lambda_transform(const std::vector<double>& psi, const Point& x,
                                 const DiscreteMeasure& nu, const CostFunction& cost,
                                 double lambda) {
    if (psi.size() != nu.size())
        throw dimension_error("c_lambda_transform: psi size does not match target support");
    if (!(lambda > 0.0)) throw error("c_lambda_transform: lambda must be positive");
    const std::vector<double> costs = detail::costs_to_support(x, nu, cost);
    std::vector<double> eta;
    return -lambda * detail::soft_assign_from_costs(psi, costs, nu.weights, lambda, eta);
}

// Soft assignment  eta_i(x) = w_i exp((psi_i - c(x,y_i))/lambda) / sum_j (...).
// Nonnegative, sums to one; as lambda -> 0 it concentrates on the Laguerre
// cell of x.
inline std::vector<double> eta_weights(const std::vector<double>& psi, const Point& x,
                                       const DiscreteMeasure& nu, const CostFunction& cost,
                                       double lambda) {
    if (psi.size() != nu.size())
        throw dimension_error("eta_weights: psi size does not match target support");
    if (!(lambda > 0.0)) throw error("eta_weights: lambda must be positive");
    const std::vector<double> costs = detail::costs_to_support(x, nu, cost);
    std::vector<double> eta;
    detail::soft_assign_from_costs(psi, costs, nu.weights, lambda, eta);
    return eta;
}

// grad_x psi^{c,lambda}(x) = sum_i eta_i(x) grad_x c(x, y_i).
inline Point grad_psi_c_lambda(const std::vector<double>& psi, const Point& x,
                               const DiscreteMeasure& nu, const CostFunction& cost,
                               double lambda) {
    const std::vector<double> eta = eta_weights(psi, x, nu, cost, lambda);
    Point g(x.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (eta[i] == 0.0) continue;
        const Point gc = cost.grad_x(x, nu.support[i]);
        for (std::size_t d = 0; d < g.size(); ++d) g[d] += eta[i] * gc[d];
    }
    return g;
}

// Semi-dual objective on a sample batch {x_k}:
//   F(psi) = (1/K) sum_k T(psi)(x_k) + sum_i w_i psi_i
// where T is the hard c-transform at lambda == 0 and the smoothed transform
// otherwise. Invariant under psi -> psi + C.
inline double semidual_objective(const std::vector<double>& psi, const std::vector<Point>& batch,
                                 const DiscreteMeasure& nu, const CostFunction& cost,
                                 double lambda) {
    if (psi.size() != nu.size())
        throw dimension_error("semidual_objective: psi size does not match target support");
    if (batch.empty()) throw error("semidual_objective: empty batch");
    std::vector<double> terms;
    terms.reserve(batch.size());
    if (lambda == 0.0) {
        for (const Point& x : batch) terms.push_back(c_transform(psi, x, nu, cost).value);
    } else {
        for (const Point& x : batch) terms.push_back(c_lambda_transform(psi, x, nu, cost, lambda));
    }
    double f = kahan_sum(terms) / static_cast<double>(batch.size());
    std::vector<double> wp(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) wp[i] = nu.weights[i] * psi[i];
    return f + kahan_sum(wp);
}

// Stochastic ascent direction for F on a batch:
//   d_i = w_i - (1/K) sum_k eta_i(x_k)      (lambda > 0)
//   d_i = w_i - (1/K) #{k : argmin cell is i}  (lambda == 0)
// Components sum to zero, mirroring the shift invariance of F.
inline std::vector<double> psi_ascent_direction(const std::vector<double>& psi,
                                                const std::vector<Point>& batch,
                                                const DiscreteMeasure& nu,
                                                const CostFunction& cost, double lambda) {
    if (psi.size() != nu.size())
        throw dimension_error("psi_ascent_direction: psi size does not match target support");
    if (batch.empty()) throw error("psi_ascent_direction: empty batch");
    const std::size_t n = nu.size();
    std::vector<double> acc(n, 0.0);
    if (lambda == 0.0) {
        for (const Point& x : batch) acc[c_transform(psi, x, nu, cost).argmin] += 1.0;
    } else {
        for (const Point& x : batch) {
            const std::vector<double> eta = eta_weights(psi, x, nu, cost, lambda);
            for (std::size_t i = 0; i < n; ++i) acc[i] += eta[i];
        }
    }
    const double inv_k = 1.0 / static_cast<double>(batch.size());
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = nu.weights[i] - acc[i] * inv_k;
    return d;
}

}  // namespace semiot
