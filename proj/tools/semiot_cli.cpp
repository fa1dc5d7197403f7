// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: the two-atom experiment, dataset training, sampling
// from checkpoints, and the oracle validation suites.
//
// Exit codes: 0 ok, 1 validation failure, 2 usage or I/O error, 3 numeric
// abort. SEMIOT_SEED overrides the config seed; an explicit --seed flag
// overrides both. Every file-producing run writes a manifest beside its
// outputs (config + seeds + version, no timestamps).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semiot/semiot.hpp"

namespace {

using namespace semiot;
using nlohmann::json;

// ----------------------------------------------------------------------------
// Small shared helpers
// ----------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    out << content;
    if (!out) throw io_error("short write on file: " + path);
}

void write_manifest(const std::string& path, const std::string& command, const json& payload) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["payload"] = payload;
    write_text_file(path, m.dump(2) + "\n");
}

Point parse_point_arg(const std::string& s, const char* flag) {
    Point p;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            p.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw config_error(std::string(flag) + ": cannot parse '" + cell + "' as a number");
        }
    }
    if (p.empty()) throw config_error(std::string(flag) + ": empty point");
    return p;
}

std::uint64_t resolve_seed(std::uint64_t config_seed, bool flag_given, std::uint64_t flag_seed) {
    std::uint64_t seed = config_seed;
    if (const char* env = std::getenv("SEMIOT_SEED")) {
        try {
            seed = std::stoull(env);
        } catch (const std::exception&) {
            throw config_error(std::string("SEMIOT_SEED is not an integer: ") + env);
        }
    }
    if (flag_given) seed = flag_seed;
    return seed;
}

// ----------------------------------------------------------------------------
// counterexample
// ----------------------------------------------------------------------------

struct CounterexampleArgs {
    double lambda = 0.1;
    double tau = 0.1;
    std::size_t steps = 500;
    std::string theta0 = "1,-0.5";
    std::string out_dir;
    std::uint64_t seed = 1;
    bool seed_given = false;
};

TrainConfig counterexample_config(const CounterexampleArgs& a, double lambda) {
    TrainConfig cfg;
    cfg.lambda = lambda;
    cfg.cost = CostFunction::squared_euclidean();
    cfg.batch_size = 1;
    cfg.outer_steps = a.steps;
    cfg.psi_steps = 0;
    cfg.lr = a.tau;
    cfg.optimizer = OptimizerKind::Plain;
    cfg.psi_mode = PsiMode::ExactClosedForm;
    cfg.boundary_rule = BoundaryRule::Alternate;
    cfg.seed = a.seed;
    cfg.log_cadence = 1;
    Point t0 = parse_point_arg(a.theta0, "--theta0");
    if (t0.size() != 2) throw config_error("--theta0 must be 2-dimensional");
    cfg.theta0 = t0;
    return cfg;
}

std::vector<Point> trajectory_points(const TrainRun& run) {
    std::vector<Point> pts;
    pts.push_back(run.initial.theta);
    for (const TrajectoryRecord& r : run.trajectory) pts.push_back(r.theta);
    return pts;
}

int run_counterexample(CounterexampleArgs a) {
    a.seed = resolve_seed(a.seed, a.seed_given, a.seed);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + a.out_dir + ": " + ec.message());

    const Point y1{0.0, 0.0}, y2{0.0, 1.0};
    const DiscreteMeasure nu = DiscreteMeasure::uniform({y1, y2});
    const Generator gen = Generator::translation(2);
    const LatentSampler zeta = LatentSampler::dirac({0.0, 0.0});
    const Point theta_star{0.5 * (y1[0] + y2[0]), 0.5 * (y1[1] + y2[1])};

    const TrainRun unreg = train(counterexample_config(a, 0.0), nu, gen, zeta);
    const TrainRun reg = train(counterexample_config(a, a.lambda), nu, gen, zeta);

    const std::string dir = a.out_dir + "/";
    // No ms column: these files are byte-reproducible across runs.
    write_text_file(dir + "traj_unreg.csv",
                    unreg.trajectory_csv(/*include_ms=*/false, /*include_initial=*/true));
    write_text_file(dir + "traj_reg.csv",
                    reg.trajectory_csv(/*include_ms=*/false, /*include_initial=*/true));
    write_counterexample_svg(dir + "fig1.svg", trajectory_points(unreg), trajectory_points(reg),
                             y1, y2, theta_star, "lambda = 0 (oscillates)",
                             "lambda = " + fmt17(a.lambda) + " (converges)");

    json payload;
    payload["lambda"] = a.lambda;
    payload["tau"] = a.tau;
    payload["steps"] = a.steps;
    payload["theta0"] = a.theta0;
    payload["seed"] = a.seed;
    payload["config_unreg"] = train_config_to_json(unreg.config);
    payload["config_reg"] = train_config_to_json(reg.config);
    write_manifest(dir + "manifest.json", "counterexample", payload);

    std::cout << "counterexample: wrote " << dir << "traj_unreg.csv, traj_reg.csv, fig1.svg\n";
    return 0;
}

// ----------------------------------------------------------------------------
// train
// ----------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string format = "csv";
    std::string config_path;
    std::string out_dir = "out";
    std::string resume;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

// Keys consumed at the CLI level (architecture); the rest is the trainer
// config and is validated there, rejecting anything unknown.
Generator generator_from_config(const json& j, std::size_t data_dim) {
    const std::string kind = j.value("generator", std::string("translation"));
    std::vector<std::size_t> widths =
        j.value("widths", std::vector<std::size_t>{});
    if (kind == "translation") {
        if (widths.empty()) widths = {data_dim};
        if (widths.size() != 1) throw config_error("translation generator takes one width");
        return Generator::translation(widths[0]);
    }
    if (kind == "affine") {
        if (widths.empty()) widths = {data_dim, data_dim};
        if (widths.size() != 2) throw config_error("affine generator takes widths [d_z, d_x]");
        return Generator::affine(widths[0], widths[1]);
    }
    if (kind == "mlp") {
        if (widths.size() < 2) throw config_error("mlp generator needs widths [d_z, ..., d_x]");
        return Generator::mlp(widths,
                              activation_from_string(j.value("activation", std::string("tanh"))));
    }
    throw config_error("unknown generator kind: " + kind);
}

LatentSampler latent_from_config(const json& j, std::size_t latent_dim, std::uint64_t seed) {
    const std::string kind = j.value("latent", std::string("gaussian"));
    const Point a = j.value("latent_a", Point(latent_dim, 0.0));
    if (kind == "dirac") return LatentSampler::dirac(a, seed);
    if (kind == "gaussian")
        return LatentSampler::gaussian(a, j.value("latent_b", Point(latent_dim, 1.0)), seed);
    if (kind == "uniform")
        return LatentSampler::uniform_box(a, j.value("latent_b", Point(latent_dim, 1.0)), seed);
    throw config_error("unknown latent kind: " + kind);
}

int run_train(const TrainArgs& a) {
    namespace fs = std::filesystem;
    if (a.format != "csv" && a.format != "idx")
        throw config_error("--format must be csv or idx, got " + a.format);
    const DiscreteMeasure nu =
        load_dataset(a.data, a.format == "csv" ? DatasetFormat::Csv : DatasetFormat::Idx);

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + a.out_dir + ": " + ec.message());
    const std::string dir = a.out_dir + "/";

    TrainRun run;
    Generator gen = Generator::translation(1);
    LatentSampler zeta = LatentSampler::dirac({0.0});
    if (!a.resume.empty()) {
        Checkpoint ckpt = load_checkpoint(a.resume);
        ckpt.config.seed = resolve_seed(ckpt.config.seed, a.seed_given, a.seed);
        if (ckpt.config.checkpoint_path.empty())
            ckpt.config.checkpoint_path = dir + "checkpoint.json";
        gen = ckpt.generator;
        zeta = ckpt.latent;
        run = train_from(ckpt.config, nu, gen, zeta, ckpt.state, ckpt.config.outer_steps);
    } else {
        json j = json::object();
        if (!a.config_path.empty()) {
            std::ifstream in(a.config_path, std::ios::binary);
            if (!in) throw io_error("cannot open config: " + a.config_path);
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw parse_error("bad config " + a.config_path + ": " + e.what());
            }
        }
        gen = generator_from_config(j, nu.dim());
        json trainer_json = j;
        for (const char* key : {"generator", "widths", "activation", "latent", "latent_a",
                                "latent_b"})
            trainer_json.erase(key);
        TrainConfig cfg = train_config_from_json(trainer_json);
        cfg.seed = resolve_seed(cfg.seed, a.seed_given, a.seed);
        if (cfg.checkpoint_path.empty()) cfg.checkpoint_path = dir + "checkpoint.json";
        zeta = latent_from_config(j, gen.input_dim(), cfg.seed);
        if (gen.output_dim() != nu.dim())
            throw config_error("generator output dimension " + std::to_string(gen.output_dim()) +
                               " does not match dataset dimension " + std::to_string(nu.dim()));
        run = train(cfg, nu, gen, zeta);
    }

    write_text_file(dir + "trajectory.csv", run.trajectory_csv(/*include_ms=*/true));
    save_checkpoint(Checkpoint{gen, zeta.with_seed(run.config.seed), run.config, run.state},
                    dir + "checkpoint.json");

    json payload;
    payload["data"] = a.data;
    payload["format"] = a.format;
    payload["config"] = train_config_to_json(run.config);
    payload["generator"] = {{"kind", to_string(gen.kind())}, {"widths", gen.widths()}};
    payload["seed"] = run.config.seed;
    payload["final_step"] = run.state.outer_step;
    write_manifest(dir + "manifest.json", "train", payload);

    std::cout << "train: " << run.state.outer_step << " steps done; wrote " << dir
              << "trajectory.csv, checkpoint.json\n";
    return 0;
}

// ----------------------------------------------------------------------------
// sample
// ----------------------------------------------------------------------------

struct SampleArgs {
    std::string checkpoint;
    std::size_t count = 16;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_sample(const SampleArgs& a) {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    LatentSampler zeta = ckpt.latent;
    if (a.seed_given || std::getenv("SEMIOT_SEED"))
        zeta = zeta.with_seed(resolve_seed(zeta.seed(), a.seed_given, a.seed));

    const std::vector<Point> z = zeta.sample(a.count, ckpt.state.next_stream);
    std::vector<Point> x;
    x.reserve(z.size());
    for (const Point& zk : z) x.push_back(ckpt.generator.forward(ckpt.state.theta, zk));

    const std::size_t d = ckpt.generator.output_dim();
    std::string csv;
    for (std::size_t i = 0; i < d; ++i) csv += (i ? "," : "") + ("x_" + std::to_string(i));
    csv += "\n";
    for (const Point& p : x) {
        for (std::size_t i = 0; i < d; ++i) csv += (i ? "," : "") + fmt17(p[i]);
        csv += "\n";
    }
    write_text_file(a.out, csv);

    // Image-shaped outputs also get a montage (side >= 8 rules out toy dims).
    std::string pgm_path;
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(d))));
    if (!x.empty() && side >= 8 && side * side == d) {
        pgm_path = a.out;
        if (pgm_path.size() > 4 && pgm_path.substr(pgm_path.size() - 4) == ".csv")
            pgm_path = pgm_path.substr(0, pgm_path.size() - 4);
        pgm_path += ".pgm";
        write_pgm_montage(pgm_path, x);
    }

    json payload;
    payload["checkpoint"] = a.checkpoint;
    payload["count"] = a.count;
    payload["seed"] = zeta.seed();
    payload["stream"] = ckpt.state.next_stream;
    if (!pgm_path.empty()) payload["pgm"] = pgm_path;
    write_manifest(a.out + ".manifest.json", "sample", payload);

    std::cout << "sample: wrote " << a.count << " points to " << a.out
              << (pgm_path.empty() ? "" : " and " + pgm_path) << "\n";
    return 0;
}

// ----------------------------------------------------------------------------
// validate
// ----------------------------------------------------------------------------

class Reporter {
public:
    void check(const std::string& name, bool pass, const std::string& detail) {
        std::cout << "check=" << name << " status=" << (pass ? "pass" : "fail")
                  << (detail.empty() ? "" : " " + detail) << "\n";
        ++total_;
        if (!pass) {
            ++failures_;
            failed_names_.push_back(name);
        }
    }

    int finish() const {
        std::cout << "checks_total=" << total_ << " checks_failed=" << failures_ << "\n";
        if (failures_ == 0) {
            std::cout << "validate: PASS\n";
            return 0;
        }
        std::cout << "validate: FAIL:";
        for (const std::string& n : failed_names_) std::cout << " " << n;
        std::cout << "\n";
        return 1;
    }

private:
    int total_ = 0;
    int failures_ = 0;
    std::vector<std::string> failed_names_;
};

DiscreteMeasure random_measure(RandomStream& rs, std::size_t n, std::size_t dim,
                               bool uniform_weights) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) {
        Point p(dim);
        for (double& v : p) v = rs.uniform(0.0, 1.0);
        pts.push_back(std::move(p));
    }
    if (uniform_weights) return DiscreteMeasure::uniform(std::move(pts));
    std::vector<double> w(n);
    for (double& v : w) v = rs.uniform(0.1, 1.0);
    return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

void suite_closed_forms(Reporter& rep, std::uint64_t seed) {
    const CostFunction sq = CostFunction::squared_euclidean();
    const Point y1{0.0, 0.0}, y2{0.0, 1.0};
    const DiscreteMeasure nu = DiscreteMeasure::uniform({y1, y2});

    {
        const auto ref = oracle::counterexample_reference({0.0, 0.0}, y1, y2, sq);
        rep.check("prop1_value", std::abs(ref.value - 0.5) <= 1e-15,
                  "got=" + fmt17(ref.value) + " want=0.5");
        rep.check("prop1_psi_star",
                  ref.psi_star[0] == 0.0 && ref.psi_star[1] == 1.0,
                  "got=(" + fmt17(ref.psi_star[0]) + "," + fmt17(ref.psi_star[1]) + ") want=(0,1)");
        rep.check("prop1_grad",
                  ref.grad_theta[0] == 0.0 && ref.grad_theta[1] == -1.0,
                  "got=(" + fmt17(ref.grad_theta[0]) + "," + fmt17(ref.grad_theta[1]) +
                      ") want=(0,-1)");
        const auto opt = oracle::counterexample_reference({0.0, 0.5}, y1, y2, sq);
        rep.check("optimum_grad_zero", norm(opt.grad_theta) <= 1e-15,
                  "grad_norm=" + fmt17(norm(opt.grad_theta)));
        const auto at_y1 = oracle::counterexample_reference(y1, y1, y2, sq);
        rep.check("value_at_y1", std::abs(at_y1.value - 0.5 * sq.value(y1, y2)) <= 1e-15,
                  "got=" + fmt17(at_y1.value));
    }

    {
        // Semi-dual objective at the closed-form potential equals the OT value
        // for both the hard and the smoothed transform.
        RandomStream rs(seed, 1);
        double worst0 = 0.0, worst_l = 0.0;
        for (int t = 0; t < 100; ++t) {
            const Point theta{rs.uniform(-2.0, 2.0), rs.uniform(-2.0, 2.0)};
            const auto ref = oracle::counterexample_reference(theta, y1, y2, sq);
            const DualPotential psi = closed_form_potential_single_atom(theta, nu, sq);
            worst0 = std::max(worst0,
                              std::abs(semidual_objective(psi, {theta}, nu, sq, 0.0) - ref.value));
            worst_l = std::max(worst_l,
                               std::abs(semidual_objective(psi, {theta}, nu, sq, 0.1) - ref.value));
        }
        rep.check("closed_form_objective_lambda0", worst0 <= 1e-9,
                  "worst_abs_err=" + fmt17(worst0) + " tol=1e-9");
        rep.check("closed_form_objective_lambda0.1", worst_l <= 1e-9,
                  "worst_abs_err=" + fmt17(worst_l) + " tol=1e-9");
    }

    {
        // Independent solver agrees with the closed form across lambda.
        RandomStream rs(seed, 2);
        double worst = 0.0;
        for (double lambda : {0.05, 0.1, 1.0}) {
            for (int t = 0; t < 5; ++t) {
                const Point theta{rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
                const DiscreteMeasure mu = DiscreteMeasure::uniform({theta});
                const auto sk = oracle::sinkhorn_solve(mu, nu, sq, lambda);
                const auto ref = oracle::counterexample_reference(theta, y1, y2, sq, lambda);
                worst = std::max(worst, std::abs(sk.primal_value - ref.value));
            }
        }
        rep.check("sinkhorn_vs_closed_form", worst <= 1e-8,
                  "worst_abs_err=" + fmt17(worst) + " tol=1e-8");
    }

    {
        // Single-atom mu forces the plan; the entropy term vanishes.
        const DiscreteMeasure mu = DiscreteMeasure::uniform({Point{0.0, 0.0}});
        const auto sk = oracle::sinkhorn_solve(mu, nu, sq, 0.1);
        const bool plan_ok = std::abs(sk.plan.pi[0][0] - 0.5) <= 1e-9 &&
                             std::abs(sk.plan.pi[0][1] - 0.5) <= 1e-9;
        rep.check("single_atom_plan_forced", plan_ok,
                  "plan=(" + fmt17(sk.plan.pi[0][0]) + "," + fmt17(sk.plan.pi[0][1]) + ")");
        const double kl = oracle::kl_divergence(sk.plan, mu, nu);
        rep.check("single_atom_kl_zero", std::abs(kl) <= 1e-12, "kl=" + fmt17(kl));
        rep.check("single_atom_value", std::abs(sk.primal_value - 0.5) <= 1e-8,
                  "got=" + fmt17(sk.primal_value) + " want=0.5");
    }

    {
        // mu = nu: the diagonal plan bounds the value by lambda log n.
        RandomStream rs(seed, 3);
        const DiscreteMeasure m = random_measure(rs, 4, 2, /*uniform_weights=*/true);
        const double lambda = 1e-3;
        const auto sk = oracle::sinkhorn_solve(m, m, sq, lambda);
        const double bound = lambda * std::log(4.0) + 1e-6;
        rep.check("self_transport_bound", sk.primal_value <= bound,
                  "value=" + fmt17(sk.primal_value) + " bound=" + fmt17(bound));
    }

    {
        // Literal entropy functional: product plan, diagonal plan, and
        // agreement with the plain KL sum on a solver plan.
        RandomStream rs(seed, 4);
        const DiscreteMeasure mu = random_measure(rs, 3, 2, false);
        const DiscreteMeasure nv = random_measure(rs, 4, 2, false);
        oracle::TransportPlan prod;
        prod.pi.assign(3, std::vector<double>(4, 0.0));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) prod.pi[i][j] = mu.weights[i] * nv.weights[j];
        const double kl_prod = oracle::kl_divergence(prod, mu, nv);
        rep.check("kl_product_zero", std::abs(kl_prod) <= 1e-12, "kl=" + fmt17(kl_prod));

        const std::size_t n = 5;
        const DiscreteMeasure u = random_measure(rs, n, 2, true);
        oracle::TransportPlan diag;
        diag.pi.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) diag.pi[i][i] = 1.0 / double(n);
        const double kl_diag = oracle::kl_divergence(diag, u, u);
        rep.check("kl_diagonal_log_n", std::abs(kl_diag - std::log(double(n))) <= 1e-12,
                  "got=" + fmt17(kl_diag) + " want=" + fmt17(std::log(double(n))));

        const auto sk = oracle::sinkhorn_solve(mu, nv, sq, 0.2);
        double plain = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double p = sk.plan.pi[i][j];
                if (p > 0.0) plain += p * std::log(p / (mu.weights[i] * nv.weights[j]));
            }
        const double lit = oracle::kl_divergence(sk.plan, mu, nv);
        rep.check("kl_literal_equals_plain", std::abs(lit - plain) <= 1e-12,
                  "literal=" + fmt17(lit) + " plain=" + fmt17(plain));
    }

    {
        // Hand values for the smoothed transform and soft assignment.
        const DualPotential psi{0.0, 0.0};
        const Point x{0.0, 0.0};
        const double got = c_lambda_transform(psi, x, nu, sq, 1.0);
        const double want = -std::log(0.5 * (1.0 + std::exp(-1.0)));
        rep.check("soft_transform_hand_value", std::abs(got - want) <= 1e-15,
                  "got=" + fmt17(got) + " want=" + fmt17(want));
        const std::vector<double> eta = eta_weights(psi, x, nu, sq, 1.0);
        const double sig = 1.0 / (1.0 + std::exp(-1.0));
        rep.check("eta_hand_value",
                  std::abs(eta[0] - sig) <= 1e-15 && std::abs(eta[0] + eta[1] - 1.0) <= 1e-15,
                  "eta0=" + fmt17(eta[0]) + " want=" + fmt17(sig));
    }

    {
        // Soft-min sandwich on random configurations (uniform target).
        RandomStream rs(seed, 5);
        bool ok = true;
        std::string why;
        for (int t = 0; t < 200 && ok; ++t) {
            const std::size_t n = 2 + rs.next_u64() % 6;
            const DiscreteMeasure target = random_measure(rs, n, 2, true);
            DualPotential psi(n);
            for (double& v : psi) v = rs.uniform(-1.0, 1.0);
            const Point x{rs.uniform(-2.0, 2.0), rs.uniform(-2.0, 2.0)};
            const double lambda = std::exp(rs.uniform(std::log(0.01), std::log(2.0)));
            const double hard = c_transform(psi, x, target, sq).value;
            const double soft = c_lambda_transform(psi, x, target, sq, lambda);
            if (!(hard <= soft + 1e-12 && soft <= hard + lambda * std::log(double(n)) + 1e-12)) {
                ok = false;
                why = "hard=" + fmt17(hard) + " soft=" + fmt17(soft) +
                      " lambda=" + fmt17(lambda) + " n=" + std::to_string(n);
            }
        }
        rep.check("soft_min_sandwich", ok, why);
    }
}

void suite_gradients(Reporter& rep, std::uint64_t seed) {
    const CostFunction sq = CostFunction::squared_euclidean();

    {
        // Harness sanity: exact on quadratics, catches a wrong gradient.
        RandomStream rs(seed, 10);
        std::vector<double> a(4), b(4);
        for (double& v : a) v = rs.uniform(0.5, 2.0);
        for (double& v : b) v = rs.uniform(-1.0, 1.0);
        auto f = [&](const std::vector<double>& x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i] * x[i] + b[i] * x[i];
            return s;
        };
        auto g = [&](const std::vector<double>& x) {
            std::vector<double> out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * a[i] * x[i] + b[i];
            return out;
        };
        std::vector<std::vector<double>> pts;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> p(4);
            for (double& v : p) v = rs.uniform(-1.0, 1.0);
            pts.push_back(std::move(p));
        }
        const auto rpt = oracle::fd_gradient_check(f, g, pts, 1e-4, 1e-10);
        rep.check("fd_quadratic_exact", rpt.pass,
                  "worst_rel_err=" + fmt17(rpt.worst.rel_error) + " tol=1e-10");
        auto g2 = [&](const std::vector<double>& x) {
            std::vector<double> out = g(x);
            for (double& v : out) v *= 2.0;
            return out;
        };
        const auto bad = oracle::fd_gradient_check(f, g2, pts, 1e-4, 1e-10);
        rep.check("fd_detects_wrong_gradient", !bad.pass,
                  "worst_rel_err=" + fmt17(bad.worst.rel_error));
    }

    {
        // VJPs against finite differences of <forward(theta, z), v>.
        RandomStream rs(seed, 11);
        struct Case {
            const char* name;
            Generator gen;
            double tol;
        };
        const std::vector<Case> cases = {
            {"vjp_fd_translation", Generator::translation(3), 1e-6},
            {"vjp_fd_affine", Generator::affine(2, 3), 1e-6},
            {"vjp_fd_mlp_tanh", Generator::mlp({2, 4, 2}, Activation::Tanh), 1e-5},
            {"vjp_fd_mlp_softplus", Generator::mlp({2, 3, 2}, Activation::Softplus), 1e-5},
        };
        for (const Case& c : cases) {
            double worst = 0.0;
            for (int t = 0; t < 50; ++t) {
                Point z(c.gen.input_dim()), v(c.gen.output_dim());
                for (double& q : z) q = rs.uniform(-1.0, 1.0);
                for (double& q : v) q = rs.uniform(-1.0, 1.0);
                ParamVector theta(c.gen.param_count());
                for (double& q : theta) q = rs.uniform(-1.0, 1.0);
                auto f = [&](const std::vector<double>& th) {
                    return dot(c.gen.forward(th, z), v);
                };
                auto g = [&](const std::vector<double>& th) { return c.gen.vjp(th, z, v); };
                const auto rpt = oracle::fd_gradient_check(f, g, {theta}, 1e-5, c.tol);
                worst = std::max(worst, rpt.worst.rel_error);
            }
            rep.check(c.name, worst <= c.tol,
                      "worst_rel_err=" + fmt17(worst) + " tol=" + fmt17(c.tol));
        }
    }

    {
        // grad of the smoothed transform in x against finite differences.
        RandomStream rs(seed, 12);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 2 + rs.next_u64() % 4;
            const DiscreteMeasure target = random_measure(rs, n, 2, false);
            DualPotential psi(n);
            for (double& q : psi) q = rs.uniform(-0.5, 0.5);
            const double lambda = rs.uniform(0.2, 1.0);
            Point x{rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
            auto f = [&](const std::vector<double>& xx) {
                return c_lambda_transform(psi, xx, target, sq, lambda);
            };
            auto g = [&](const std::vector<double>& xx) {
                return grad_psi_c_lambda(psi, xx, target, sq, lambda);
            };
            const auto rpt = oracle::fd_gradient_check(f, g, {x}, 1e-5, 1e-6);
            worst = std::max(worst, rpt.worst.rel_error);
        }
        rep.check("grad_soft_transform_fd", worst <= 1e-6, "worst_rel_err=" + fmt17(worst));
    }

    {
        // Ascent direction is the psi-gradient of the semi-dual objective.
        RandomStream rs(seed, 13);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const std::size_t n = 2 + rs.next_u64() % 4;
            const DiscreteMeasure target = random_measure(rs, n, 2, false);
            std::vector<Point> batch;
            for (int k = 0; k < 4; ++k)
                batch.push_back({rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)});
            const double lambda = rs.uniform(0.2, 1.0);
            DualPotential psi(n);
            for (double& q : psi) q = rs.uniform(-0.5, 0.5);
            auto f = [&](const std::vector<double>& p) {
                return semidual_objective(p, batch, target, sq, lambda);
            };
            auto g = [&](const std::vector<double>& p) {
                return psi_ascent_direction(p, batch, target, sq, lambda);
            };
            const auto rpt = oracle::fd_gradient_check(f, g, {psi}, 1e-5, 1e-6);
            worst = std::max(worst, rpt.worst.rel_error);
        }
        rep.check("ascent_direction_fd", worst <= 1e-6, "worst_rel_err=" + fmt17(worst));
    }

    {
        // Generator gradient with converged potential equals the analytic
        // gradient of the two-atom OT value.
        RandomStream rs(seed, 14);
        const Point y1{0.0, 0.0}, y2{0.0, 1.0};
        const DiscreteMeasure nu = DiscreteMeasure::uniform({y1, y2});
        const Generator gen = Generator::translation(2);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const ParamVector theta{rs.uniform(-2.0, 2.0), rs.uniform(-2.0, 2.0)};
            const DualPotential psi = closed_form_potential_single_atom(theta, nu, sq);
            const ParamVector got =
                generator_gradient_estimate(gen, theta, psi, {Point{0.0, 0.0}}, nu, sq, 0.1);
            const auto ref = oracle::counterexample_reference(theta, y1, y2, sq, 0.1);
            worst = std::max(worst, dist(got, ref.grad_theta));
        }
        rep.check("generator_gradient_counterexample", worst <= 1e-6,
                  "worst_abs_err=" + fmt17(worst) + " tol=1e-6");
    }

    {
        // Generator gradient against finite differences of the frozen-psi
        // objective, common random numbers (the same latent batch).
        RandomStream rs(seed, 15);
        struct Case {
            const char* name;
            Generator gen;
        };
        const std::vector<Case> cases = {
            {"generator_gradient_fd_translation", Generator::translation(2)},
            {"generator_gradient_fd_affine", Generator::affine(2, 2)},
            {"generator_gradient_fd_mlp_tanh", Generator::mlp({2, 4, 2}, Activation::Tanh)},
        };
        for (const Case& c : cases) {
            double worst = 0.0;
            for (int t = 0; t < 7; ++t) {
                const std::size_t n = 3 + rs.next_u64() % 3;
                const DiscreteMeasure target = random_measure(rs, n, c.gen.output_dim(), false);
                DualPotential psi(n);
                for (double& q : psi) q = rs.uniform(-0.5, 0.5);
                const double lambda = rs.uniform(0.3, 1.0);
                std::vector<Point> z_batch;
                for (int k = 0; k < 5; ++k) {
                    Point z(c.gen.input_dim());
                    for (double& q : z) q = rs.uniform(-1.0, 1.0);
                    z_batch.push_back(std::move(z));
                }
                ParamVector theta(c.gen.param_count());
                for (double& q : theta) q = rs.uniform(-0.8, 0.8);
                auto f = [&](const std::vector<double>& th) {
                    std::vector<Point> x;
                    for (const Point& z : z_batch) x.push_back(c.gen.forward(th, z));
                    return semidual_objective(psi, x, target, sq, lambda);
                };
                auto g = [&](const std::vector<double>& th) {
                    return generator_gradient_estimate(c.gen, th, psi, z_batch, target, sq, lambda);
                };
                const auto rpt = oracle::fd_gradient_check(f, g, {theta}, 1e-5, 1e-6);
                worst = std::max(worst, rpt.worst.rel_error);
            }
            rep.check(c.name, worst <= 1e-6, "worst_rel_err=" + fmt17(worst) + " tol=1e-6");
        }
    }
}

void suite_duality(Reporter& rep, std::uint64_t seed) {
    const CostFunction sq = CostFunction::squared_euclidean();
    RandomStream rs(seed, 20);
    const double tol = 1e-9;
    double worst_gap = 0.0, worst_marg = 0.0, worst_module = 0.0, worst_perm = 0.0;
    bool all_converged = true;
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = 2 + rs.next_u64() % 9;
        const std::size_t n = 2 + rs.next_u64() % 9;
        const double lambda = t % 2 == 0 ? 0.05 : 0.5;
        const DiscreteMeasure mu = random_measure(rs, m, 2, /*uniform_weights=*/true);
        const DiscreteMeasure nv = random_measure(rs, n, 2, /*uniform_weights=*/false);
        const auto sk = oracle::sinkhorn_solve(mu, nv, sq, lambda, tol);
        all_converged = all_converged && sk.converged;

        const double scale = std::max(1.0, std::abs(sk.primal_value));
        worst_gap = std::max(worst_gap,
                             std::abs(sk.primal_value - sk.semidual_value) / scale);

        const std::vector<double> rows = sk.plan.row_sums();
        const std::vector<double> cols = sk.plan.col_sums();
        for (std::size_t i = 0; i < m; ++i)
            worst_marg = std::max(worst_marg, std::abs(rows[i] - mu.weights[i]));
        for (std::size_t j = 0; j < n; ++j)
            worst_marg = std::max(worst_marg, std::abs(cols[j] - nv.weights[j]));

        // Main-module semi-dual objective at the oracle potential (uniform mu
        // makes the batch average the exact expectation).
        const double module_val = semidual_objective(sk.psi, mu.support, nv, sq, lambda);
        worst_module = std::max(worst_module, std::abs(module_val - sk.primal_value) / scale);

        // Permuting the target atoms must not change the value.
        DiscreteMeasure nv_perm = nv;
        std::reverse(nv_perm.support.begin(), nv_perm.support.end());
        std::reverse(nv_perm.weights.begin(), nv_perm.weights.end());
        const auto sk_perm = oracle::sinkhorn_solve(mu, nv_perm, sq, lambda, tol);
        worst_perm = std::max(worst_perm, std::abs(sk.primal_value - sk_perm.primal_value));
    }
    rep.check("sinkhorn_converged", all_converged, "");
    rep.check("primal_equals_semidual", worst_gap <= 1e-6,
              "worst_rel_gap=" + fmt17(worst_gap) + " tol=1e-6");
    rep.check("plan_marginals", worst_marg <= 10 * tol,
              "worst_abs_dev=" + fmt17(worst_marg) + " tol=" + fmt17(10 * tol));
    rep.check("module_matches_oracle", worst_module <= 1e-6,
              "worst_rel_err=" + fmt17(worst_module) + " tol=1e-6");
    rep.check("permutation_invariance", worst_perm <= 1e-8,
              "worst_abs_err=" + fmt17(worst_perm) + " tol=1e-8");
}

struct ValidateArgs {
    std::string suite = "all";
    std::uint64_t seed = 12345;
    bool seed_given = false;
};

int run_validate(const ValidateArgs& a) {
    if (a.suite != "closed-forms" && a.suite != "gradients" && a.suite != "duality" &&
        a.suite != "all")
        throw config_error("unknown suite: " + a.suite +
                           " (expected closed-forms, gradients, duality, or all)");
    const std::uint64_t seed = resolve_seed(a.seed, a.seed_given, a.seed);
    std::cout << "manifest command=validate version=" << kVersion << " suite=" << a.suite
              << " seed=" << seed << "\n";
    Reporter rep;
    if (a.suite == "closed-forms" || a.suite == "all") suite_closed_forms(rep, seed);
    if (a.suite == "gradients" || a.suite == "all") suite_gradients(rep, seed);
    if (a.suite == "duality" || a.suite == "all") suite_duality(rep, seed);
    return rep.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semiot: semi-discrete entropic optimal transport training"};
    app.require_subcommand(1);

    CounterexampleArgs ce;
    CLI::App* ce_cmd =
        app.add_subcommand("counterexample", "Two-atom experiment: lambda=0 vs lambda>0");
    ce_cmd->add_option("--lambda", ce.lambda, "Regularization for the converging branch")
        ->check(CLI::PositiveNumber);
    ce_cmd->add_option("--tau", ce.tau, "Plain gradient step size")->check(CLI::PositiveNumber);
    ce_cmd->add_option("--steps", ce.steps, "Outer iterations");
    ce_cmd->add_option("--theta0", ce.theta0, "Initial parameter, e.g. '1,-0.5'");
    ce_cmd->add_option("--out-dir", ce.out_dir, "Output directory")->required();
    ce_cmd->add_option("--seed", ce.seed, "Run seed");

    TrainArgs tr;
    CLI::App* tr_cmd = app.add_subcommand("train", "Train a generator on a dataset");
    tr_cmd->add_option("--data", tr.data, "Dataset path")->required();
    tr_cmd->add_option("--format", tr.format, "Dataset format: csv or idx");
    tr_cmd->add_option("--config", tr.config_path, "JSON config (flat key-value)");
    tr_cmd->add_option("--out-dir", tr.out_dir, "Output directory");
    tr_cmd->add_option("--resume", tr.resume, "Resume from a checkpoint");
    tr_cmd->add_option("--seed", tr.seed, "Override config seed");

    SampleArgs sm;
    CLI::App* sm_cmd = app.add_subcommand("sample", "Sample from a trained checkpoint");
    sm_cmd->add_option("--checkpoint", sm.checkpoint, "Checkpoint path")->required();
    sm_cmd->add_option("--count", sm.count, "Number of samples");
    sm_cmd->add_option("--out", sm.out, "Output CSV path")->required();
    sm_cmd->add_option("--seed", sm.seed, "Override sampler seed");

    ValidateArgs va;
    CLI::App* va_cmd = app.add_subcommand("validate", "Run the oracle validation suites");
    va_cmd->add_option("--suite", va.suite, "closed-forms, gradients, duality, or all");
    va_cmd->add_option("--seed", va.seed, "Suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    ce.seed_given = ce_cmd->count("--seed") > 0;
    tr.seed_given = tr_cmd->count("--seed") > 0;
    sm.seed_given = sm_cmd->count("--seed") > 0;
    va.seed_given = va_cmd->count("--seed") > 0;

    try {
        if (ce_cmd->parsed()) return run_counterexample(ce);
        if (tr_cmd->parsed()) return run_train(tr);
        if (sm_cmd->parsed()) return run_sample(sm);
        if (va_cmd->parsed()) return run_validate(va);
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
