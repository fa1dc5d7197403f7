// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Dual potential solvers: stochastic gradient ascent with Polyak averaging,
// deterministic full-batch ascent on a frozen sample, and the single-atom
// closed form.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "semiot/common.hpp"
#include "semiot/generators.hpp"
#include "semiot/measures.hpp"
#include "semiot/semidual.hpp"

namespace semiot {

enum class StepSchedule { Constant, InverseSqrt };

struct AscentConfig {
    std::size_t n_steps = 200;
    std::size_t batch_size = 100;
    StepSchedule schedule = StepSchedule::InverseSqrt;
    double step_scale = 1.0;  // c0; step t uses c0 or c0/sqrt(t+1)
    bool averaging = true;    // return the Polyak mean of iterates
    bool warm_start = true;   // honored by callers that manage psi across outer steps

    void validate() const {
        if (batch_size < 1) throw config_error("AscentConfig: batch_size must be >= 1");
        if (!(step_scale > 0.0)) throw config_error("AscentConfig: step_scale must be positive");
    }
};

// l1 norm of the ascent direction; zero iff psi is first-order stationary for
// the semi-dual objective on this batch. Lies in [0, 2]. Defined for lambda=0
// as the hard-assignment limit.
inline double marginal_violation(const std::vector<double>& psi, const std::vector<Point>& batch,
                                 const DiscreteMeasure& nu, const CostFunction& cost,
                                 double lambda) {
    const std::vector<double> d = psi_ascent_direction(psi, batch, nu, cost, lambda);
    std::vector<double> abs_d(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) abs_d[i] = std::abs(d[i]);
    return kahan_sum(abs_d);
}

// For mu = delta_x the exact Kantorovitch potential (any lambda >= 0, up to a
// constant) is psi_i = c(x, y_i).
inline std::vector<double> closed_form_potential_single_atom(const Point& x,
                                                             const DiscreteMeasure& nu,
                                                             const CostFunction& cost) {
    std::vector<double> psi(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) psi[i] = cost.value(x, nu.support[i]);
    return psi;
}

// Subtracts the mean: gauge-fixes the additive constant for comparisons.
inline std::vector<double> mean_centered(std::vector<double> psi) {
    const double m = mean(psi);
    for (double& v : psi) v -= m;
    return psi;
}

// Stochastic gradient ascent on the semi-dual objective. Each step draws a
// fresh batch from sampler stream stream_base + t, pushes it through the
// generator and moves psi along the ascent direction. With averaging on, the
// running mean of the iterates is returned (the raw endpoint otherwise).
inline std::vector<double> solve_dual_sga(const std::vector<double>& psi0, const Generator& gen,
                                          const ParamVector& theta, const LatentSampler& zeta,
                                          const DiscreteMeasure& nu, const CostFunction& cost,
                                          double lambda, const AscentConfig& cfg,
                                          std::uint64_t stream_base = 0) {
    if (!(lambda > 0.0)) throw error("solve_dual_sga: lambda must be positive");
    if (psi0.size() != nu.size())
        throw dimension_error("solve_dual_sga: psi size does not match target support");
    cfg.validate();
    if (cfg.n_steps == 0) return psi0;

    std::vector<double> psi = psi0;
    std::vector<double> avg(psi.size(), 0.0);
    for (std::size_t t = 0; t < cfg.n_steps; ++t) {
        const std::vector<Point> z = zeta.sample(cfg.batch_size, stream_base + t);
        std::vector<Point> x;
        x.reserve(z.size());
        for (const Point& zk : z) x.push_back(gen.forward(theta, zk));
        const std::vector<double> dir = psi_ascent_direction(psi, x, nu, cost, lambda);
        const double step = cfg.schedule == StepSchedule::Constant
                                ? cfg.step_scale
                                : cfg.step_scale / std::sqrt(static_cast<double>(t + 1));
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += step * dir[i];
        if (!all_finite(psi))
            throw numeric_error("solve_dual_sga: non-finite potential at step " +
                                std::to_string(t));
        // Running mean over iterates psi_1..psi_t.
        const double w = 1.0 / static_cast<double>(t + 1);
        for (std::size_t i = 0; i < psi.size(); ++i) avg[i] += w * (psi[i] - avg[i]);
    }
    return cfg.averaging ? avg : psi;
}

struct FullBatchResult {
    std::vector<double> psi;
    bool converged = false;       // marginal_violation <= tol reached
    std::size_t steps_used = 0;
    double final_violation = 0.0;
};

// Deterministic gradient ascent on a frozen batch, with the cost matrix
// cached once. Stops at marginal_violation <= tol (default 1e-8) or after
// n_steps. Sustained objective decrease means the step is too large for this
// concave problem and is reported as divergence.
inline FullBatchResult solve_dual_fullbatch(const std::vector<double>& psi0,
                                            const std::vector<Point>& generated,
                                            const DiscreteMeasure& nu, const CostFunction& cost,
                                            double lambda, std::size_t n_steps, double step,
                                            double tol = 1e-8) {
    if (!(lambda > 0.0)) throw error("solve_dual_fullbatch: lambda must be positive");
    if (psi0.size() != nu.size())
        throw dimension_error("solve_dual_fullbatch: psi size does not match target support");
    if (generated.empty()) throw error("solve_dual_fullbatch: empty batch");
    if (!(step > 0.0)) throw error("solve_dual_fullbatch: step must be positive");

    const std::size_t k_count = generated.size();
    const std::size_t n = nu.size();
    // costs[k][i] = c(x_k, y_i), computed once.
    std::vector<std::vector<double>> costs(k_count);
    for (std::size_t k = 0; k < k_count; ++k)
        costs[k] = detail::costs_to_support(generated[k], nu, cost);

    const double inv_k = 1.0 / static_cast<double>(k_count);
    std::vector<double> eta;
    // Direction and objective from the cached costs in one sweep.
    auto evaluate = [&](const std::vector<double>& psi, std::vector<double>& dir) {
        dir.assign(n, 0.0);
        std::vector<double> lse_terms(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
            lse_terms[k] = -lambda *
                detail::soft_assign_from_costs(psi, costs[k], nu.weights, lambda, eta);
            for (std::size_t i = 0; i < n; ++i) dir[i] -= eta[i] * inv_k;
        }
        std::vector<double> wp(n);
        for (std::size_t i = 0; i < n; ++i) {
            dir[i] += nu.weights[i];
            wp[i] = nu.weights[i] * psi[i];
        }
        return kahan_sum(lse_terms) * inv_k + kahan_sum(wp);
    };

    FullBatchResult res;
    res.psi = psi0;
    std::vector<double> dir;
    double prev_obj = evaluate(res.psi, dir);
    std::size_t decrease_streak = 0;
    for (std::size_t t = 0; t < n_steps; ++t) {
        std::vector<double> abs_d(n);
        for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::abs(dir[i]);
        res.final_violation = kahan_sum(abs_d);
        if (res.final_violation <= tol) {
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) res.psi[i] += step * dir[i];
        if (!all_finite(res.psi))
            throw numeric_error("solve_dual_fullbatch: non-finite potential at step " +
                                std::to_string(t));
        res.steps_used = t + 1;
        const double obj = evaluate(res.psi, dir);
        decrease_streak = obj < prev_obj ? decrease_streak + 1 : 0;
        if (decrease_streak >= 100)
            throw numeric_error(
                "solve_dual_fullbatch: objective decreased for 100 consecutive steps "
                "(diverging) at step " + std::to_string(t));
        prev_obj = obj;
    }
    std::vector<double> abs_d(n);
    for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::abs(dir[i]);
    res.final_violation = kahan_sum(abs_d);
    res.converged = res.final_violation <= tol;
    return res;
}

}  // namespace semiot
