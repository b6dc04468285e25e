#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "liqgame/informed.hpp"
#include "markets.hpp"
#include "oracles.hpp"

using namespace liqgame;

namespace {

// Signal/penalty parameters of the asymmetric penalty market with a
// representative liquidity price pair.
MarketParams penalty_market_with_kappas() {
    MarketParams p = testutil::running_penalty_market(2.0);
    p.kappa = {0.1, 0.2};
    return p;
}

}  // namespace

TEST_CASE("informed constants") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedConstants c = informed_constants(p);
    CHECK(c.kappa_harmonic == Catch::Approx(1.0 / 1500.0).margin(1e-18));
    CHECK(c.Phi == Catch::Approx(0.015).margin(1e-17));
    CHECK(c.gamma == Catch::Approx(std::sqrt(22.5)).epsilon(1e-14));
    // cross-check gamma^2 * kappa = Phi
    CHECK(c.gamma * c.gamma * c.kappa_harmonic == Catch::Approx(c.Phi).epsilon(1e-13));
    // kappa * Phi = (1/1500) * 0.015 = 1e-5
    const double s = std::sqrt(1e-5);
    CHECK(c.sqrt_kappa_phi == Catch::Approx(s).epsilon(1e-14));
    CHECK(c.zeta == Catch::Approx((1.0 + s) / (1.0 - s)).epsilon(1e-13));

    SECTION("degenerate Phi = 0 is rejected") {
        MarketParams q = p;
        q.psi_informed = 0.0;
        q.phi_informed = 0.0;
        CHECK_THROWS_AS(informed_constants(q), ValidationError);
    }
}

TEST_CASE("terminal identities of the closed forms") {
    for (const MarketParams& p :
         {testutil::baseline_two_broker(), penalty_market_with_kappas()}) {
        const InformedSolution sol = solve_informed(p);
        const int n = p.n_steps;
        CHECK(sol.m[n] == 0.0);
        CHECK(std::abs(sol.h2[n] + p.a_informed) <= 1e-13 * std::max(1.0, p.a_informed));
        CHECK(sol.f2[n] == 0.0);
        CHECK(sol.f0[n] == 0.0);
    }
}

TEST_CASE("h2 matches backward integration of its Riccati equation") {
    for (const MarketParams& p :
         {testutil::baseline_two_broker(), penalty_market_with_kappas()}) {
        const InformedConstants c = informed_constants(p);
        const auto oracle = testutil::rk4_backward(
            [&](double, double h) { return c.Phi - h * h / c.kappa_harmonic; }, p.horizon,
            -p.a_informed, 100000);
        double max_err = 0.0;
        for (int k = 0; k <= 100000; k += 500) {
            const double t = p.horizon * k / 100000;
            max_err = std::max(max_err, std::abs(informed_h2(t, c) - oracle[k]));
        }
        CHECK(max_err <= 1e-6);
    }
}

TEST_CASE("h2 lies strictly between -a_I and -sqrt(kappa*Phi)") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedConstants c = informed_constants(p);
    for (int k = 1; k < 2000; ++k) {
        const double t = p.horizon * k / 2000;
        const double h = informed_h2(t, c);
        CHECK(h > -p.a_informed);
        CHECK(h < -c.sqrt_kappa_phi);
    }
}

TEST_CASE("m matches backward integration of its linear equation") {
    for (const MarketParams& p :
         {testutil::baseline_two_broker(), penalty_market_with_kappas()}) {
        const InformedConstants c = informed_constants(p);
        // Coupled (h2, m) system so the oracle is independent of both closed forms.
        const auto traj = testutil::rk4_backward_vec(
            [&](double, const std::vector<double>& y, std::vector<double>& dy) {
                dy[0] = c.Phi - y[0] * y[0] / c.kappa_harmonic;
                dy[1] = c.theta * y[1] - 1.0 - y[1] * y[0] / c.kappa_harmonic;
            },
            p.horizon, {-p.a_informed, 0.0}, 100000);
        double max_err = 0.0;
        for (int k = 0; k <= 100000; k += 500) {
            const double t = p.horizon * k / 100000;
            max_err = std::max(max_err, std::abs(informed_m(t, c) - traj[k][1]));
        }
        CHECK(max_err <= 1e-6);
    }
}

TEST_CASE("m handles theta = gamma and strong mean reversion") {
    SECTION("removable singularity at theta = gamma") {
        MarketParams p = testutil::baseline_two_broker();
        p.n_brokers = 1;
        p.b = {0.001};
        p.k = {0.0012};
        p.kappa = {1.0};
        p.c = {0.001};
        p.a = {1.0};
        p.phi = {0.01};
        p.theta_u = {5.0};
        p.eta_u = {50.0};
        p.u0 = {0.0};
        p.q0 = {0.0};
        p.x0 = {0.0};
        p.rho = {1.0};
        p.psi_informed = 0.0;
        p.phi_informed = 4.0;  // gamma = sqrt(4/1) = 2
        p.theta = 2.0;         // exactly equal
        const InformedConstants c = informed_constants(p);
        REQUIRE(c.gamma == 2.0);
        const auto traj = testutil::rk4_backward_vec(
            [&](double, const std::vector<double>& y, std::vector<double>& dy) {
                dy[0] = c.Phi - y[0] * y[0] / c.kappa_harmonic;
                dy[1] = c.theta * y[1] - 1.0 - y[1] * y[0] / c.kappa_harmonic;
            },
            p.horizon, {-p.a_informed, 0.0}, 100000);
        for (int k = 0; k <= 100000; k += 1000) {
            const double t = p.horizon * k / 100000;
            CHECK(std::abs(informed_m(t, c) - traj[k][1]) <= 1e-6);
        }
        // continuity across the singular line
        MarketParams q = p;
        q.theta = 2.0 + 1e-9;
        const InformedConstants c2 = informed_constants(q);
        CHECK(informed_m(0.0, c) == Catch::Approx(informed_m(0.0, c2)).epsilon(1e-6));
    }
    SECTION("m vanishes as theta grows") {
        MarketParams p = testutil::baseline_two_broker();
        p.theta = 1000.0;
        const InformedConstants c = informed_constants(p);
        for (int k = 0; k <= 100; ++k) {
            CHECK(std::abs(informed_m(p.horizon * k / 100, c)) < 1e-2);
        }
    }
}

TEST_CASE("f integrals match a refined quadrature oracle") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedSolution sol = solve_informed(p);
    const InformedConstants& c = sol.constants;
    // 1e-8 relative with an absolute floor of 1e-12 * f2(0): close to maturity
    // f2 decays like (T-t)^3 and the steep terminal layer of m caps any
    // fixed-grid rule at that absolute scale.
    const double floor = 1e-12 * sol.f2[0];
    for (int k : {0, 137, 1250, 2500, 3750, 4999}) {
        const double t = sol.grid.node(k);
        const double oracle_f2 = testutil::simpson(
            [&](double u) {
                const double m = informed_m(u, c);
                return m * m / (4.0 * c.kappa_harmonic) * std::exp(-2.0 * c.theta * (u - t));
            },
            t, p.horizon, 40000);
        CHECK(std::abs(sol.f2[k] - oracle_f2) <= 1e-8 * std::abs(oracle_f2) + floor);
    }
    const double oracle_f0 = testutil::simpson(
        [&](double u) {
            return c.eta * c.eta *
                   testutil::simpson(
                       [&](double v) {
                           const double m = informed_m(v, c);
                           return m * m / (4.0 * c.kappa_harmonic) *
                                  std::exp(-2.0 * c.theta * (v - u));
                       },
                       u, p.horizon, 400);
        },
        0.0, p.horizon, 400);
    CHECK(std::abs(sol.f0[0] - oracle_f0) <= 1e-6 * std::abs(oracle_f0));

    SECTION("eta = 0 kills f0") {
        MarketParams q = p;
        q.eta = 1e-300;  // eta must stay positive; the limit is exact at underflow scale
        const InformedSolution z = solve_informed(q);
        for (int k = 0; k <= q.n_steps; k += 500) CHECK(z.f0[k] == 0.0);
        for (int k = 0; k <= q.n_steps; k += 500) CHECK(z.f2[k] >= 0.0);
    }
}

TEST_CASE("informed speed proportionality and terminal behaviour") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedSolution sol = solve_informed(p);

    SECTION("zero state gives zero speeds") {
        const auto w = informed_speed(0.3, 0.0, 0.0, sol);
        CHECK(w[0] == 0.0);
        CHECK(w[1] == 0.0);
    }
    SECTION("kappa2 = 2 kappa1 halves the speed bitwise") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unif(-2.0, 2.0);
        for (int trial = 0; trial < 200; ++trial) {
            const double t = 0.999 * p.horizon * (trial / 200.0);
            const double alpha = unif(rng), qI = unif(rng);
            const auto w = informed_speed(t, alpha, qI, sol);
            CHECK(w[1] == 0.5 * w[0]);
        }
    }
    SECTION("kappa_i omega_i agree to rounding for generic kappas") {
        MarketParams q = p;
        q.kappa = {0.0013, 0.0029};
        const InformedSolution s2 = solve_informed(q);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        double worst = 0.0;
        for (int trial = 0; trial < 500; ++trial) {
            const double t = p.horizon * (trial / 500.0);
            const double alpha = unif(rng), qI = unif(rng);
            const auto w = informed_speed(t, alpha, qI, s2);
            const double i0 = q.kappa[0] * w[0];
            const double i1 = q.kappa[1] * w[1];
            const double scale = std::max({std::abs(i0), std::abs(i1), 1e-30});
            worst = std::max(worst, std::abs(i0 - i1) / scale);
        }
        CHECK(worst <= 1e-12);
    }
    SECTION("terminal speeds liquidate inventory only") {
        const auto w = informed_speed(p.horizon, 123.45, 1.0, sol);
        CHECK(w[0] == Catch::Approx(-p.a_informed / p.kappa[0]).epsilon(1e-12));
        CHECK(w[1] == Catch::Approx(-p.a_informed / p.kappa[1]).epsilon(1e-12));
    }
    SECTION("omega1 is negative throughout when a_I > sqrt(kappa*Phi)") {
        for (int k = 0; k <= p.n_steps; k += 100) {
            CHECK(sol.omega1[0][k] < 0.0);
            CHECK(sol.omega1[1][k] < 0.0);
        }
    }
}

TEST_CASE("informed value function") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedSolution sol = solve_informed(p);
    SECTION("terminal value") {
        const double v = informed_value(p.horizon, 0.7, 101.0, 2.0, 3.0, sol);
        CHECK(v == Catch::Approx(3.0 + 101.0 * 2.0 - p.a_informed * 4.0).epsilon(1e-12));
    }
    SECTION("only the constant term survives at zero state") {
        const double t = sol.grid.node(1234);
        const double v = informed_value(t, 0.0, 101.0, 0.0, 5.5, sol);
        CHECK(v == 5.5 + sol.f0[1234]);
    }
}

TEST_CASE("worst case drift") {
    CHECK(worst_case_drift(0.0, 0.01, 1.0) == 0.0);
    CHECK(worst_case_drift(2.0, 0.01, 1.0) == Catch::Approx(0.02).margin(1e-18));
    CHECK(worst_case_drift(-3.0, 0.5, 2.0) < 0.0);
}

TEST_CASE("flow inference and alpha extraction") {
    const MarketParams p = testutil::baseline_two_broker();
    const InformedSolution sol = solve_informed(p);

    SECTION("scaling factor for the observed broker") {
        const TimeGrid grid{1.0, 4};
        const auto inf = infer_total_and_inventory({1.0, 1.0, 1.0, 1.0, 1.0}, 0, p.kappa, 0.0, grid);
        for (double w : inf.total_speed) CHECK(w == Catch::Approx(1.5).epsilon(1e-15));
        CHECK(inf.inventory[0] == 0.0);
        CHECK(inf.inventory[4] == Catch::Approx(1.5).epsilon(1e-12));
    }
    SECTION("single broker passthrough") {
        const TimeGrid grid{1.0, 2};
        const auto inf = infer_total_and_inventory({2.0, 2.0, 2.0}, 0, {0.003}, 1.0, grid);
        CHECK(inf.total_speed[0] == 2.0);
        CHECK(inf.inventory[2] == Catch::Approx(1.0 + 2.0).epsilon(1e-15));
    }
    SECTION("round trip against the feedback rule") {
        // A synthetic informed path: alpha and qI evolve arbitrarily; the
        // observed broker-1 flow plus the true initial inventory recovers the
        // inventory path exactly under the shared left-endpoint rule.
        const TimeGrid grid = p.grid();
        std::vector<double> omega1(grid.size());
        double qI = 0.75;
        std::vector<double> qI_path(grid.size());
        for (int k = 0; k < grid.size(); ++k) {
            const double alpha = std::sin(6.0 * grid.node(k));
            const auto w = informed_speed(grid.node(k), alpha, qI, sol);
            omega1[k] = w[0];
            qI_path[k] = qI;
            if (k < grid.n_steps) qI += grid.dt() * (w[0] + w[1]);
        }
        const auto inf = infer_total_and_inventory(omega1, 0, p.kappa, 0.75, grid);
        double max_err = 0.0;
        for (int k = 0; k < grid.size(); ++k) {
            max_err = std::max(max_err, std::abs(inf.inventory[k] - qI_path[k]));
        }
        CHECK(max_err <= 1e-9);
    }
    SECTION("extraction inverts the feedback rule") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> unif(-2.0, 2.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double t = 0.99 * p.horizon * trial / 100.0;
            const double alpha = unif(rng), qI = unif(rng);
            const auto w = informed_speed(t, alpha, qI, sol);
            const double ahat = extract_alpha(w[0], qI, t, 0, sol);
            CHECK(ahat == Catch::Approx(alpha).margin(1e-8).epsilon(1e-9));
        }
    }
    SECTION("misspecified inventory shifts alpha by the propagation identity") {
        const double t = 0.4, alpha = 1.3, qI = -0.6, dq = 0.25;
        const auto w = informed_speed(t, alpha, qI, sol);
        const double ahat = extract_alpha(w[0], qI + dq, t, 0, sol);
        const double expected = alpha - sol.omega1_at(0, t) * dq / sol.omega0_at(0, t);
        CHECK(ahat == Catch::Approx(expected).epsilon(1e-10));
    }
    SECTION("extraction is undefined at maturity") {
        CHECK_THROWS_AS(extract_alpha(1.0, 0.0, p.horizon, 0, sol), NumericalError);
    }
}
