// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Alternating training loop: estimate the dual potential for the current
// generator, then descend on the generator parameters along the semi-dual
// gradient. Deterministic given seeds; checkpointable and resumable.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semiot/common.hpp"
#include "semiot/dual_solver.hpp"
#include "semiot/generators.hpp"
#include "semiot/measures.hpp"
#include "semiot/semidual.hpp"
#include "semiot/version.hpp"

namespace semiot {

enum class OptimizerKind { Adam, Plain };
enum class PsiMode { Sga, ExactClosedForm };

// Tie handling for the unregularized branch, where the closed-form potential
// puts every sample exactly on all Laguerre-cell boundaries: Alternate cycles
// through the tied cells across outer steps (the subdifferential read that
// makes the scheme oscillate); SmallestIndex always takes the first.
enum class BoundaryRule { Alternate, SmallestIndex };

inline std::string to_string(OptimizerKind k) {
    return k == OptimizerKind::Adam ? "adam" : "plain";
}
inline std::string to_string(PsiMode m) { return m == PsiMode::Sga ? "sga" : "exact"; }
inline std::string to_string(BoundaryRule r) {
    return r == BoundaryRule::Alternate ? "alternate" : "smallest-index";
}
inline std::string to_string(StepSchedule s) {
    return s == StepSchedule::Constant ? "constant" : "inverse-sqrt";
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "plain") return OptimizerKind::Plain;
    throw config_error("unknown optimizer: " + s);
}
inline PsiMode psi_mode_from_string(const std::string& s) {
    if (s == "sga") return PsiMode::Sga;
    if (s == "exact") return PsiMode::ExactClosedForm;
    throw config_error("unknown psi mode: " + s);
}
inline BoundaryRule boundary_rule_from_string(const std::string& s) {
    if (s == "alternate") return BoundaryRule::Alternate;
    if (s == "smallest-index") return BoundaryRule::SmallestIndex;
    throw config_error("unknown boundary rule: " + s);
}
inline StepSchedule schedule_from_string(const std::string& s) {
    if (s == "constant") return StepSchedule::Constant;
    if (s == "inverse-sqrt") return StepSchedule::InverseSqrt;
    throw config_error("unknown step schedule: " + s);
}

struct TrainConfig {
    double lambda = 0.1;
    CostFunction cost = CostFunction::squared_euclidean();
    std::size_t batch_size = 100;   // K
    std::size_t outer_steps = 4000; // N
    std::size_t psi_steps = 200;    // inner ascent steps per outer step
    double lr = 1e-4;               // Adam learning rate, or the plain step tau
    OptimizerKind optimizer = OptimizerKind::Adam;
    PsiMode psi_mode = PsiMode::Sga;
    BoundaryRule boundary_rule = BoundaryRule::Alternate;
    bool warm_start = true;  // keep psi across outer steps
    StepSchedule psi_schedule = StepSchedule::InverseSqrt;
    double psi_step_scale = 1.0;
    bool psi_averaging = true;
    std::uint64_t seed = 1;       // latent sampling streams
    std::uint64_t init_seed = 1;  // theta initialization
    std::optional<ParamVector> theta0;
    std::size_t log_cadence = 10;
    std::size_t checkpoint_cadence = 0;  // 0 = only on abort / explicit save
    std::string checkpoint_path;

    void validate() const {
        if (!(lambda >= 0.0)) throw config_error("TrainConfig: lambda must be >= 0");
        if (lambda == 0.0 && psi_mode != PsiMode::ExactClosedForm)
            throw config_error(
                "TrainConfig: lambda = 0 is supported only with the exact closed-form psi "
                "mode (the unregularized problem has no usable gradient elsewhere)");
        if (batch_size < 1) throw config_error("TrainConfig: batch_size must be >= 1");
        if (log_cadence < 1) throw config_error("TrainConfig: log_cadence must be >= 1");
        if (!(lr >= 0.0)) throw config_error("TrainConfig: lr must be >= 0");
        if (!(psi_step_scale > 0.0)) throw config_error("TrainConfig: psi_step_scale must be > 0");
    }
};

struct TrajectoryRecord {
    std::size_t step = 0;
    double objective = 0.0;           // semi-dual objective on the step's batch
    double marginal_violation = 0.0;  // l1 ascent-direction norm on the same batch
    std::vector<double> theta;        // full snapshot when dim <= 16, else empty
    double theta_norm = 0.0;
    double ms = 0.0;  // cumulative wall-clock since this run segment started
};

struct TrainState {
    ParamVector theta;
    DualPotential psi;
    AdamState adam;
    std::uint64_t next_stream = 0;  // first unconsumed latent stream key
    std::size_t outer_step = 0;
};

struct TrainRun {
    TrainConfig config;
    TrajectoryRecord initial;  // state before any update (step 0)
    std::vector<TrajectoryRecord> trajectory;
    TrainState state;

    const ParamVector& final_theta() const { return state.theta; }
    const DualPotential& final_psi() const { return state.psi; }

    // CSV rows use 17 significant digits so doubles round-trip. The ms column
    // is wall-clock and excluded from determinism comparisons.
    std::string trajectory_csv(bool include_ms = true, bool include_initial = false) const {
        const std::size_t d = state.theta.size();
        const bool full_theta = d <= 16;
        std::string out = "step,objective,marginal_violation";
        if (full_theta)
            for (std::size_t i = 0; i < d; ++i) out += ",theta_" + std::to_string(i);
        else
            out += ",theta_norm";
        if (include_ms) out += ",ms";
        out += "\n";
        auto row = [&](const TrajectoryRecord& r) {
            out += std::to_string(r.step) + "," + fmt17(r.objective) + "," +
                   fmt17(r.marginal_violation);
            if (full_theta)
                for (double t : r.theta) out += "," + fmt17(t);
            else
                out += "," + fmt17(r.theta_norm);
            if (include_ms) out += "," + fmt17(r.ms);
            out += "\n";
        };
        if (include_initial) row(initial);
        for (const TrajectoryRecord& r : trajectory) row(r);
        return out;
    }
};

// ----------------------------------------------------------------------------
// Generator gradient
// ----------------------------------------------------------------------------

// Stochastic gradient of the semi-dual objective in theta at frozen psi:
//   (1/K) sum_k (d_theta g(theta, z_k))^T grad_x psi^{c,lambda}(g(theta, z_k)).
inline ParamVector generator_gradient_estimate(const Generator& gen, const ParamVector& theta,
                                               const DualPotential& psi,
                                               const std::vector<Point>& z_batch,
                                               const DiscreteMeasure& nu, const CostFunction& cost,
                                               double lambda) {
    if (!(lambda > 0.0)) throw error("generator_gradient_estimate: lambda must be positive");
    if (z_batch.empty()) throw error("generator_gradient_estimate: empty batch");
    ParamVector acc(gen.param_count(), 0.0);
    for (std::size_t k = 0; k < z_batch.size(); ++k) {
        const Point x = gen.forward(theta, z_batch[k]);
        if (!all_finite(x))
            throw numeric_error("generator_gradient_estimate: non-finite forward output at sample " +
                                std::to_string(k));
        const Point v = grad_psi_c_lambda(psi, x, nu, cost, lambda);
        const ParamVector g = gen.vjp(theta, z_batch[k], v);
        if (!all_finite(g))
            throw numeric_error("generator_gradient_estimate: non-finite vjp at sample " +
                                std::to_string(k));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
    const double inv_k = 1.0 / static_cast<double>(z_batch.size());
    for (double& a : acc) a *= inv_k;
    return acc;
}

namespace detail {

// Indices whose c-transform value bit-equals the minimum: the Laguerre cells
// x sits on (singleton off boundaries).
inline std::vector<std::size_t> tied_cells(const DualPotential& psi, const Point& x,
                                           const DiscreteMeasure& nu, const CostFunction& cost) {
    const double best = c_transform(psi, x, nu, cost).value;
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < nu.size(); ++i)
        if (cost.value(x, nu.support[i]) - psi[i] == best) tied.push_back(i);
    return tied;
}

// Subgradient for the unregularized branch: each sample contributes the cost
// gradient of one attaining cell, selected by the boundary rule (outer_step
// drives the alternation).
inline ParamVector hard_gradient_estimate(const Generator& gen, const ParamVector& theta,
                                          const DualPotential& psi,
                                          const std::vector<Point>& z_batch,
                                          const DiscreteMeasure& nu, const CostFunction& cost,
                                          BoundaryRule rule, std::size_t outer_step) {
    ParamVector acc(gen.param_count(), 0.0);
    for (std::size_t k = 0; k < z_batch.size(); ++k) {
        const Point x = gen.forward(theta, z_batch[k]);
        const std::vector<std::size_t> tied = tied_cells(psi, x, nu, cost);
        const std::size_t pick = rule == BoundaryRule::Alternate && tied.size() > 1
                                     ? tied[outer_step % tied.size()]
                                     : tied.front();
        const Point v = cost.grad_x(x, nu.support[pick]);
        const ParamVector g = gen.vjp(theta, z_batch[k], v);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
    const double inv_k = 1.0 / static_cast<double>(z_batch.size());
    for (double& a : acc) a *= inv_k;
    return acc;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Checkpoints
// ----------------------------------------------------------------------------

struct Checkpoint {
    Generator generator = Generator::translation(1);
    LatentSampler latent = LatentSampler::dirac({0.0});
    TrainConfig config;
    TrainState state;
};

namespace detail {

inline nlohmann::json cost_to_json(const CostFunction& c) {
    nlohmann::json j;
    j["cost"] = c.kind() == CostKind::SquaredEuclidean ? "sqeuclidean" : "power";
    if (c.kind() == CostKind::PowerNorm) j["cost_power"] = c.power();
    return j;
}

inline CostFunction cost_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("cost", "sqeuclidean");
    if (kind == "sqeuclidean") return CostFunction::squared_euclidean();
    if (kind == "power") return CostFunction::power_norm(j.value("cost_power", 2.0));
    throw config_error("unknown cost kind: " + kind);
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
    nlohmann::json j = cost_to_json(c.cost);
    j["lambda"] = c.lambda;
    j["batch_size"] = c.batch_size;
    j["outer_steps"] = c.outer_steps;
    j["psi_steps"] = c.psi_steps;
    j["lr"] = c.lr;
    j["optimizer"] = to_string(c.optimizer);
    j["psi_mode"] = to_string(c.psi_mode);
    j["boundary_rule"] = to_string(c.boundary_rule);
    j["warm_start"] = c.warm_start;
    j["psi_schedule"] = to_string(c.psi_schedule);
    j["psi_step_scale"] = c.psi_step_scale;
    j["psi_averaging"] = c.psi_averaging;
    j["seed"] = c.seed;
    j["init_seed"] = c.init_seed;
    if (c.theta0) j["theta0"] = *c.theta0;
    j["log_cadence"] = c.log_cadence;
    j["checkpoint_cadence"] = c.checkpoint_cadence;
    j["checkpoint_path"] = c.checkpoint_path;
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "cost",        "cost_power",  "lambda",        "batch_size",
        "outer_steps", "psi_steps",   "lr",            "optimizer",
        "psi_mode",    "boundary_rule", "warm_start",  "psi_schedule",
        "psi_step_scale", "psi_averaging", "seed",     "init_seed",
        "theta0",      "log_cadence", "checkpoint_cadence", "checkpoint_path"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw config_error("unknown config key: " + it.key());
    }
    TrainConfig c;
    c.cost = cost_from_json(j);
    c.lambda = j.value("lambda", c.lambda);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.outer_steps = j.value("outer_steps", c.outer_steps);
    c.psi_steps = j.value("psi_steps", c.psi_steps);
    c.lr = j.value("lr", c.lr);
    if (j.contains("optimizer"))
        c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    if (j.contains("psi_mode"))
        c.psi_mode = psi_mode_from_string(j.at("psi_mode").get<std::string>());
    if (j.contains("boundary_rule"))
        c.boundary_rule = boundary_rule_from_string(j.at("boundary_rule").get<std::string>());
    c.warm_start = j.value("warm_start", c.warm_start);
    if (j.contains("psi_schedule"))
        c.psi_schedule = schedule_from_string(j.at("psi_schedule").get<std::string>());
    c.psi_step_scale = j.value("psi_step_scale", c.psi_step_scale);
    c.psi_averaging = j.value("psi_averaging", c.psi_averaging);
    c.seed = j.value("seed", c.seed);
    c.init_seed = j.value("init_seed", c.init_seed);
    if (j.contains("theta0")) c.theta0 = j.at("theta0").get<ParamVector>();
    c.log_cadence = j.value("log_cadence", c.log_cadence);
    c.checkpoint_cadence = j.value("checkpoint_cadence", c.checkpoint_cadence);
    c.checkpoint_path = j.value("checkpoint_path", c.checkpoint_path);
    c.validate();
    return c;
}

inline nlohmann::json generator_to_json(const Generator& g) {
    nlohmann::json j;
    j["kind"] = to_string(g.kind());
    j["widths"] = g.widths();
    if (g.kind() == GeneratorKind::Mlp) j["activation"] = to_string(g.activation());
    return j;
}

inline Generator generator_from_json(const nlohmann::json& j) {
    const GeneratorKind kind = generator_kind_from_string(j.at("kind").get<std::string>());
    const std::vector<std::size_t> widths = j.at("widths").get<std::vector<std::size_t>>();
    switch (kind) {
        case GeneratorKind::Translation: return Generator::translation(widths.back());
        case GeneratorKind::Affine: return Generator::affine(widths.front(), widths.back());
        case GeneratorKind::Mlp:
            return Generator::mlp(widths, activation_from_string(j.value("activation", "tanh")));
    }
    throw config_error("unreachable generator kind");
}

inline nlohmann::json latent_to_json(const LatentSampler& s) {
    nlohmann::json j;
    switch (s.kind()) {
        case LatentKind::Dirac: j["kind"] = "dirac"; break;
        case LatentKind::Gaussian: j["kind"] = "gaussian"; break;
        case LatentKind::Uniform: j["kind"] = "uniform"; break;
    }
    j["a"] = s.param_a();
    j["b"] = s.param_b();
    j["seed"] = s.seed();
    return j;
}

inline LatentSampler latent_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const Point a = j.at("a").get<Point>();
    const Point b = j.at("b").get<Point>();
    const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    if (kind == "dirac") return LatentSampler::dirac(a, seed);
    if (kind == "gaussian") return LatentSampler::gaussian(a, b, seed);
    if (kind == "uniform") return LatentSampler::uniform_box(a, b, seed);
    throw config_error("unknown latent kind: " + kind);
}

}  // namespace detail

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return detail::config_to_json(c);
}

// Flat key-value parse; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    return detail::config_from_json(j);
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["format"] = "semiot-checkpoint";
    j["version"] = kCheckpointVersion;
    j["generator"] = detail::generator_to_json(ckpt.generator);
    j["latent"] = detail::latent_to_json(ckpt.latent);
    j["config"] = detail::config_to_json(ckpt.config);
    nlohmann::json s;
    s["outer_step"] = ckpt.state.outer_step;
    s["next_stream"] = ckpt.state.next_stream;
    s["theta"] = ckpt.state.theta;
    s["psi"] = ckpt.state.psi;
    s["adam"] = {{"m", ckpt.state.adam.m}, {"v", ckpt.state.adam.v},
                 {"step", ckpt.state.adam.step}, {"lr", ckpt.state.adam.lr},
                 {"beta1", ckpt.state.adam.beta1}, {"beta2", ckpt.state.adam.beta2},
                 {"eps", ckpt.state.adam.eps}};
    j["state"] = std::move(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("short write on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("corrupt checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.value("format", "") != "semiot-checkpoint")
            throw parse_error("not a checkpoint file: " + path);
        const int version = j.value("version", -1);
        if (version != kCheckpointVersion)
            throw error("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(kCheckpointVersion) + "): " + path);
        Checkpoint c;
        c.generator = detail::generator_from_json(j.at("generator"));
        c.latent = detail::latent_from_json(j.at("latent"));
        c.config = detail::config_from_json(j.at("config"));
        const nlohmann::json& s = j.at("state");
        c.state.outer_step = s.at("outer_step").get<std::size_t>();
        c.state.next_stream = s.at("next_stream").get<std::uint64_t>();
        c.state.theta = s.at("theta").get<ParamVector>();
        c.state.psi = s.at("psi").get<DualPotential>();
        c.state.adam.m = s.at("adam").at("m").get<std::vector<double>>();
        c.state.adam.v = s.at("adam").at("v").get<std::vector<double>>();
        c.state.adam.step = s.at("adam").at("step").get<std::uint64_t>();
        c.state.adam.lr = s.at("adam").at("lr").get<double>();
        c.state.adam.beta1 = s.at("adam").at("beta1").get<double>();
        c.state.adam.beta2 = s.at("adam").at("beta2").get<double>();
        c.state.adam.eps = s.at("adam").at("eps").get<double>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("corrupt checkpoint " + path + ": " + e.what());
    }
}

// ----------------------------------------------------------------------------
// Training loop
// ----------------------------------------------------------------------------

namespace detail {

inline TrajectoryRecord make_record(std::size_t step, double objective, double violation,
                                    const ParamVector& theta, double ms) {
    TrajectoryRecord r;
    r.step = step;
    r.objective = objective;
    r.marginal_violation = violation;
    if (theta.size() <= 16) r.theta = theta;
    r.theta_norm = norm(theta);
    r.ms = ms;
    return r;
}

}  // namespace detail

// Advances the state until outer_step == until_step, appending trajectory
// records at the log cadence (and at outer_steps itself). train() wraps this;
// resuming from a checkpoint calls it directly with the loaded state.
inline TrainRun train_from(const TrainConfig& cfg, const DiscreteMeasure& nu, const Generator& gen,
                           const LatentSampler& zeta, TrainState state, std::size_t until_step) {
    cfg.validate();
    if (until_step > cfg.outer_steps)
        throw config_error("train_from: until_step exceeds configured outer_steps");
    if (state.theta.size() != gen.param_count())
        throw dimension_error("train_from: theta length does not match generator");
    if (state.psi.size() != nu.size())
        throw dimension_error("train_from: psi length does not match target support");
    if (cfg.psi_mode == PsiMode::ExactClosedForm && zeta.kind() != LatentKind::Dirac)
        throw config_error("train_from: exact psi mode requires a Dirac latent (single atom)");
    if (zeta.dim() != gen.input_dim())
        throw dimension_error("train_from: latent dimension does not match generator input");
    if (nu.dim() != gen.output_dim())
        throw dimension_error("train_from: target dimension does not match generator output");

    const LatentSampler sampler = zeta.with_seed(cfg.seed);
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    TrainRun run;
    run.config = cfg;

    auto write_checkpoint_if_configured = [&](const TrainState& s) {
        if (cfg.checkpoint_path.empty()) return;
        save_checkpoint(Checkpoint{gen, sampler, cfg, s}, cfg.checkpoint_path);
    };

    // Step-0 diagnostics on a peeked batch (the stream key is not consumed).
    // A numeric failure here follows the same abort contract as a failure
    // inside the upcoming step: persist the state, then rethrow.
    try {
        const std::vector<Point> z = sampler.sample(cfg.batch_size, state.next_stream);
        std::vector<Point> x;
        x.reserve(z.size());
        for (const Point& zk : z) x.push_back(gen.forward(state.theta, zk));
        DualPotential psi0 = state.psi;
        if (cfg.psi_mode == PsiMode::ExactClosedForm)
            psi0 = closed_form_potential_single_atom(x.front(), nu, cfg.cost);
        run.initial = detail::make_record(
            state.outer_step, semidual_objective(psi0, x, nu, cfg.cost, cfg.lambda),
            marginal_violation(psi0, x, nu, cfg.cost, cfg.lambda), state.theta, 0.0);
    } catch (const numeric_error& e) {
        write_checkpoint_if_configured(state);
        throw numeric_error("training aborted at outer step " +
                            std::to_string(state.outer_step + 1) + ": " + e.what());
    }

    while (state.outer_step < until_step) {
        const std::size_t k = state.outer_step + 1;
        const bool record = k % cfg.log_cadence == 0 || k == cfg.outer_steps;
        double objective = 0.0, violation = 0.0;

        // Any numeric failure inside the step persists the last good state
        // before aborting.
        try {
            // (1) Dual potential for the current theta.
            if (cfg.psi_mode == PsiMode::Sga) {
                if (!cfg.warm_start) state.psi.assign(nu.size(), 0.0);
                AscentConfig ac;
                ac.n_steps = cfg.psi_steps;
                ac.batch_size = cfg.batch_size;
                ac.schedule = cfg.psi_schedule;
                ac.step_scale = cfg.psi_step_scale;
                ac.averaging = cfg.psi_averaging;
                ac.warm_start = cfg.warm_start;
                state.psi = solve_dual_sga(state.psi, gen, state.theta, sampler, nu, cfg.cost,
                                           cfg.lambda, ac, state.next_stream);
                state.next_stream += cfg.psi_steps;
            } else {
                const Point atom =
                    gen.forward(state.theta, sampler.sample(1, state.next_stream).front());
                state.psi = closed_form_potential_single_atom(atom, nu, cfg.cost);
            }

            // (2) Fresh latent batch for the theta update.
            const std::vector<Point> z = sampler.sample(cfg.batch_size, state.next_stream);
            state.next_stream += 1;

            if (record) {
                std::vector<Point> x;
                x.reserve(z.size());
                for (const Point& zk : z) x.push_back(gen.forward(state.theta, zk));
                objective = semidual_objective(state.psi, x, nu, cfg.cost, cfg.lambda);
                violation = marginal_violation(state.psi, x, nu, cfg.cost, cfg.lambda);
            }

            // (3) Theta step.
            const ParamVector grad =
                cfg.lambda > 0.0
                    ? generator_gradient_estimate(gen, state.theta, state.psi, z, nu, cfg.cost,
                                                  cfg.lambda)
                    : detail::hard_gradient_estimate(gen, state.theta, state.psi, z, nu, cfg.cost,
                                                     cfg.boundary_rule, state.outer_step);
            if (cfg.optimizer == OptimizerKind::Adam) {
                auto [theta_next, adam_next] = adam_step(state.adam, state.theta, grad);
                state.theta = std::move(theta_next);
                state.adam = std::move(adam_next);
            } else {
                for (std::size_t i = 0; i < state.theta.size(); ++i)
                    state.theta[i] -= cfg.lr * grad[i];
            }
            if (!all_finite(state.theta) || !all_finite(state.psi))
                throw numeric_error("non-finite parameters");
        } catch (const numeric_error& e) {
            write_checkpoint_if_configured(state);
            throw numeric_error("training aborted at outer step " + std::to_string(k) + ": " +
                                e.what());
        }
        state.outer_step = k;

        if (record)
            run.trajectory.push_back(
                detail::make_record(k, objective, violation, state.theta, elapsed_ms()));
        if (cfg.checkpoint_cadence != 0 && k % cfg.checkpoint_cadence == 0)
            write_checkpoint_if_configured(state);
    }

    run.state = std::move(state);
    return run;
}

inline TrainRun train(const TrainConfig& cfg, const DiscreteMeasure& nu, const Generator& gen,
                      const LatentSampler& zeta) {
    cfg.validate();
    TrainState state;
    state.theta = cfg.theta0 ? *cfg.theta0 : gen.init_params(cfg.init_seed);
    if (state.theta.size() != gen.param_count())
        throw dimension_error("train: theta0 length does not match generator");
    state.psi.assign(nu.size(), 0.0);
    state.adam = AdamState::init(state.theta.size(), cfg.lr);
    return train_from(cfg, nu, gen, zeta, std::move(state), cfg.outer_steps);
}

}  // namespace semiot
