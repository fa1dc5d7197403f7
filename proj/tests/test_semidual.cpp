// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "semiot/dual_solver.hpp"
#include "semiot/rng.hpp"
#include "semiot/semidual.hpp"

using namespace semiot;

namespace {

const CostFunction kSq = CostFunction::squared_euclidean();

DiscreteMeasure two_atoms() { return DiscreteMeasure::uniform({{0.0, 0.0}, {0.0, 1.0}}); }

DiscreteMeasure random_target(RandomStream& rs, std::size_t n, bool uniform = true) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i)
        pts.push_back({rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)});
    if (uniform) return DiscreteMeasure::uniform(std::move(pts));
    std::vector<double> w(n);
    for (double& v : w) v = rs.uniform(0.1, 1.0);
    return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

}  // namespace

TEST_CASE("c-transform takes the minimum and breaks ties toward the smallest index") {
    const auto nu = two_atoms();
    // psi = 0: values are the raw costs (0 and 1).
    auto r = c_transform({0.0, 0.0}, {0.0, 0.0}, nu, kSq);
    CHECK(r.value == 0.0);
    CHECK(r.argmin == 0);

    r = c_transform({0.0, 0.0}, {0.0, 1.0}, nu, kSq);
    CHECK(r.value == 0.0);
    CHECK(r.argmin == 1);

    // psi = (0,1) makes both terms equal at x = 0: smallest index wins.
    r = c_transform({0.0, 1.0}, {0.0, 0.0}, nu, kSq);
    CHECK(r.value == 0.0);
    CHECK(r.argmin == 0);

    CHECK_THROWS_AS(c_transform({0.0}, {0.0, 0.0}, nu, kSq), dimension_error);
}

TEST_CASE("smoothed transform hand value and domain checks") {
    const auto nu = two_atoms();
    // -log(0.5 (1 + e^-1)) at psi = 0, x = y1, lambda = 1.
    const double got = c_lambda_transform({0.0, 0.0}, {0.0, 0.0}, nu, kSq, 1.0);
    const double want = -std::log(0.5 * (1.0 + std::exp(-1.0)));
    CHECK(got == Catch::Approx(want).margin(1e-15));

    CHECK_THROWS_AS(c_lambda_transform({0.0, 0.0}, {0.0, 0.0}, nu, kSq, 0.0), error);
    CHECK_THROWS_AS(c_lambda_transform({0.0, 0.0}, {0.0, 0.0}, nu, kSq, -1.0), error);
    CHECK_THROWS_AS(c_lambda_transform({0.0}, {0.0, 0.0}, nu, kSq, 1.0), dimension_error);
}

TEST_CASE("soft-min sandwich holds on random configurations") {
    RandomStream rs(101, 0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rs.next_u64() % 6;
        const auto nu = random_target(rs, n);
        DualPotential psi(n);
        for (double& v : psi) v = rs.uniform(-1.0, 1.0);
        const Point x{rs.uniform(-2.0, 2.0), rs.uniform(-2.0, 2.0)};
        const double lambda = std::exp(rs.uniform(std::log(0.01), std::log(2.0)));
        const double hard = c_transform(psi, x, nu, kSq).value;
        const double soft = c_lambda_transform(psi, x, nu, kSq, lambda);
        CHECK(hard <= soft + 1e-12);
        CHECK(soft <= hard + lambda * std::log(double(n)) + 1e-12);
    }
}

TEST_CASE("smoothing bias shrinks with lambda") {
    RandomStream rs(102, 0);
    for (int t = 0; t < 100; ++t) {
        const auto nu = random_target(rs, 4);
        DualPotential psi(4);
        for (double& v : psi) v = rs.uniform(-1.0, 1.0);
        const Point x{rs.uniform(-2.0, 2.0), rs.uniform(-2.0, 2.0)};
        const double hard = c_transform(psi, x, nu, kSq).value;
        const double g1 = c_lambda_transform(psi, x, nu, kSq, 1.0) - hard;
        const double g2 = c_lambda_transform(psi, x, nu, kSq, 0.1) - hard;
        const double g3 = c_lambda_transform(psi, x, nu, kSq, 0.01) - hard;
        CHECK(g1 >= g2 - 1e-12);
        CHECK(g2 >= g3 - 1e-12);
        CHECK(g3 >= -1e-12);
    }
}

TEST_CASE("soft assignment is a probability vector with the softmax hand value") {
    const auto nu = two_atoms();
    const auto eta = eta_weights({0.0, 0.0}, {0.0, 0.0}, nu, kSq, 1.0);
    const double sig = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(eta[0] == Catch::Approx(sig).margin(1e-15));
    CHECK(eta[1] == Catch::Approx(1.0 - sig).margin(1e-15));
    CHECK(eta[0] + eta[1] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("soft assignment concentrates on the active cell as lambda shrinks") {
    RandomStream rs(103, 0);
    for (int t = 0; t < 100; ++t) {
        const auto nu = random_target(rs, 5, /*uniform=*/false);
        DualPotential psi(5);
        for (double& v : psi) v = rs.uniform(-0.5, 0.5);
        const Point x{rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
        const std::size_t cell = c_transform(psi, x, nu, kSq).argmin;
        double prev = 0.0;
        for (double lambda : {1.0, 0.1, 0.01}) {
            const auto eta = eta_weights(psi, x, nu, kSq, lambda);
            double sum = 0.0;
            for (double e : eta) {
                CHECK(e >= 0.0);
                sum += e;
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-12));
            CHECK(eta[cell] >= prev - 1e-12);
            prev = eta[cell];
        }
        // Once lambda is small against the margin between the best and the
        // runner-up cell, the active cell dominates.
        constexpr double kInf = std::numeric_limits<double>::infinity();
        double best = kInf, second = kInf;
        for (std::size_t i = 0; i < 5; ++i) {
            const double s = kSq.value(x, nu.support[i]) - psi[i];
            if (s < best) {
                second = best;
                best = s;
            } else if (s < second) {
                second = s;
            }
        }
        const double gap = second - best;
        if (gap > 0.0) {
            const auto eta = eta_weights(psi, x, nu, kSq, gap / 20.0);
            CHECK(eta[cell] > 0.95);
        }
    }
}

TEST_CASE("gradient of the smoothed transform is the eta-average of cost gradients") {
    const auto nu = two_atoms();
    // At the closed-form potential the weights are (1/2, 1/2):
    // grad = (x - y1) + (x - y2) = 2x - (y1 + y2).
    const Point x{0.0, 0.0};
    const DualPotential psi{0.0, 1.0};  // c(x, y_i) at x = 0
    const Point g = grad_psi_c_lambda(psi, x, nu, kSq, 0.1);
    CHECK(g[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(g[1] == Catch::Approx(-1.0).margin(1e-15));
}

TEST_CASE("gradient of the smoothed transform matches finite differences") {
    RandomStream rs(104, 0);
    for (int t = 0; t < 50; ++t) {
        const auto nu = random_target(rs, 4, /*uniform=*/false);
        DualPotential psi(4);
        for (double& v : psi) v = rs.uniform(-0.5, 0.5);
        const double lambda = rs.uniform(0.2, 1.0);
        const Point x{rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
        const Point g = grad_psi_c_lambda(psi, x, nu, kSq, lambda);
        const double h = 1e-6;
        for (std::size_t d = 0; d < 2; ++d) {
            Point xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            const double fd = (c_lambda_transform(psi, xp, nu, kSq, lambda) -
                               c_lambda_transform(psi, xm, nu, kSq, lambda)) /
                              (2.0 * h);
            CHECK(g[d] == Catch::Approx(fd).margin(1e-6));
        }
    }
}

TEST_CASE("semi-dual objective: hand value, shift invariance, concavity") {
    const auto nu = two_atoms();
    const Point theta{0.7, -0.3};
    const DualPotential psi_star = closed_form_potential_single_atom(theta, nu, kSq);
    // At the closed-form potential the objective is the OT value for any lambda.
    const double want = 0.5 * (kSq.value(theta, nu.support[0]) + kSq.value(theta, nu.support[1]));
    CHECK(semidual_objective(psi_star, {theta}, nu, kSq, 0.0) ==
          Catch::Approx(want).margin(1e-12));
    CHECK(semidual_objective(psi_star, {theta}, nu, kSq, 0.1) ==
          Catch::Approx(want).margin(1e-12));

    RandomStream rs(105, 0);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rs.next_u64() % 5;
        const auto target = random_target(rs, n, /*uniform=*/false);
        DualPotential psi(n);
        for (double& v : psi) v = rs.uniform(-1.0, 1.0);
        std::vector<Point> batch;
        for (int k = 0; k < 3; ++k)
            batch.push_back({rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)});
        const double lambda = t % 2 == 0 ? 0.0 : rs.uniform(0.05, 1.0);
        const double c_shift = rs.uniform(-5.0, 5.0);
        DualPotential shifted = psi;
        for (double& v : shifted) v += c_shift;
        const double f0 = semidual_objective(psi, batch, target, kSq, lambda);
        const double f1 = semidual_objective(shifted, batch, target, kSq, lambda);
        CHECK(std::abs(f0 - f1) <= 1e-12);

        if (lambda > 0.0) {
            DualPotential other(n);
            for (double& v : other) v = rs.uniform(-1.0, 1.0);
            DualPotential mid(n);
            for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (psi[i] + other[i]);
            const double fm = semidual_objective(mid, batch, target, kSq, lambda);
            const double fo = semidual_objective(other, batch, target, kSq, lambda);
            CHECK(fm >= 0.5 * (f0 + fo) - 1e-10);  // concavity in psi
        }
    }

    CHECK_THROWS_AS(semidual_objective(psi_star, {}, nu, kSq, 0.1), error);
}

TEST_CASE("ascent direction sums to zero and differentiates the objective") {
    RandomStream rs(106, 0);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + rs.next_u64() % 5;
        const auto target = random_target(rs, n, /*uniform=*/false);
        DualPotential psi(n);
        for (double& v : psi) v = rs.uniform(-0.5, 0.5);
        std::vector<Point> batch;
        for (int k = 0; k < 4; ++k)
            batch.push_back({rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)});
        const double lambda = rs.uniform(0.2, 1.0);
        const auto dir = psi_ascent_direction(psi, batch, target, kSq, lambda);
        CHECK(kahan_sum(dir) == Catch::Approx(0.0).margin(1e-12));

        const double h = 1e-6;
        for (std::size_t i = 0; i < n; ++i) {
            DualPotential pp = psi, pm = psi;
            pp[i] += h;
            pm[i] -= h;
            const double fd = (semidual_objective(pp, batch, target, kSq, lambda) -
                               semidual_objective(pm, batch, target, kSq, lambda)) /
                              (2.0 * h);
            CHECK(dir[i] == Catch::Approx(fd).margin(1e-6));
        }
    }
}

TEST_CASE("hard ascent direction counts Laguerre cells") {
    const auto nu = two_atoms();
    // Both samples fall in the cell of y1 under psi = 0.
    const auto dir = psi_ascent_direction({0.0, 0.0}, {{0.0, 0.1}, {0.0, 0.2}}, nu, kSq, 0.0);
    CHECK(dir[0] == Catch::Approx(0.5 - 1.0).margin(1e-15));
    CHECK(dir[1] == Catch::Approx(0.5).margin(1e-15));
}
