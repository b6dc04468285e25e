#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "liqgame/params.hpp"

namespace liqgame {

// Constants entering the informed trader's closed-form solution:
//   kappa = harmonic mean of the per-broker liquidity prices,
//   Phi   = psi_I*sigma^2/2 + phi_I  (effective running penalty),
//   gamma = sqrt(Phi/kappa),
//   zeta  = (a_I + sqrt(kappa*Phi)) / (a_I - sqrt(kappa*Phi)).
struct InformedConstants {
    double kappa_harmonic = 0.0;
    double Phi = 0.0;
    double gamma = 0.0;
    double zeta = 0.0;
    double sqrt_kappa_phi = 0.0;
    double horizon = 0.0;
    double theta = 0.0;  // signal mean-reversion
    double eta = 0.0;    // signal volatility
    double a_informed = 0.0;
};

inline InformedConstants informed_constants(const MarketParams& p) {
    InformedConstants c;
    c.kappa_harmonic = harmonic_kappa(p.kappa);
    c.Phi = 0.5 * p.psi_informed * p.sigma * p.sigma + p.phi_informed;
    c.horizon = p.horizon;
    c.theta = p.theta;
    c.eta = p.eta;
    c.a_informed = p.a_informed;
    std::vector<std::string> issues;
    if (!(c.Phi > 0.0)) {
        issues.push_back(
            "Phi = psi_I*sigma^2/2 + phi_I must be > 0: the closed forms degenerate at "
            "Phi = 0 (use a strictly positive running or ambiguity penalty)");
        throw ValidationError(std::move(issues));
    }
    c.gamma = std::sqrt(c.Phi / c.kappa_harmonic);
    c.sqrt_kappa_phi = std::sqrt(c.kappa_harmonic * c.Phi);
    const double denom = p.a_informed - c.sqrt_kappa_phi;
    if (std::abs(denom) <= 1e-14 * std::max(1.0, p.a_informed + c.sqrt_kappa_phi)) {
        issues.push_back("zeta singular: a_I equals sqrt(kappa*Phi)");
        throw ValidationError(std::move(issues));
    }
    c.zeta = (p.a_informed + c.sqrt_kappa_phi) / denom;
    return c;
}

namespace detail {
// expm1(z)/z extended by its limit 1 at z = 0.
inline double expm1_over(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }
}  // namespace detail

// h2(t) = -sqrt(kappa*Phi) * (zeta e^{g(T-t)} + e^{-g(T-t)}) / (zeta e^{g(T-t)} - e^{-g(T-t)}),
// evaluated with numerator and denominator scaled by e^{-g(T-t)} so large
// gamma*(T-t) cannot overflow. Equals -a_I at t = T.
inline double informed_h2(double t, const InformedConstants& c) {
    const double tau = c.horizon - t;
    const double e2 = std::exp(-2.0 * c.gamma * tau);
    const double den = c.zeta - e2;
    if (std::abs(den) < 1e-300) throw NumericalError("informed h2: singular denominator");
    return -c.sqrt_kappa_phi * (c.zeta + e2) / den;
}

// m(t), written with both exponential differences in expm1 form; the
// theta = gamma removable singularity is evaluated through expm1(z)/z with
// its z -> 0 limit. Equals 0 at t = T.
inline double informed_m(double t, const InformedConstants& c) {
    const double tau = c.horizon - t;
    const double e2 = std::exp(-2.0 * c.gamma * tau);
    const double first = c.zeta * std::expm1(-(c.theta + c.gamma) * tau) / (c.theta + c.gamma);
    const double second = e2 * tau * detail::expm1_over(-(c.theta - c.gamma) * tau);
    return (first + second) / (e2 - c.zeta);
}

// Time-gridded closed-form solution of the informed trader's problem.
// omega0[j][k] = m(t_k)/(2 kappa_j) and omega1[j][k] = h2(t_k)/kappa_j are the
// feedback coefficients of the optimal speed toward broker j.
struct InformedSolution {
    InformedConstants constants;
    TimeGrid grid;
    std::vector<double> kappa;
    std::vector<double> m, h2, f2, f0;
    std::vector<std::vector<double>> omega0, omega1;

    int n_brokers() const { return static_cast<int>(kappa.size()); }

    double omega0_at(int broker, double t) const {
        return informed_m(t, constants) / (2.0 * kappa[broker]);
    }
    double omega1_at(int broker, double t) const {
        return informed_h2(t, constants) / kappa[broker];
    }
};

// f2(t) = int_t^T m(u)^2/(4 kappa) e^{-2 theta (u-t)} du and
// f0(t) = int_t^T eta^2 f2(u) du, both by composite Simpson on the shared
// grid (midpoints from the closed form for m). The exponential weight is
// carried through the backward recurrence
//   f2(t_k) = local integral + e^{-2 theta dt} f2(t_{k+1}),
// which stays bounded for any theta.
inline void informed_f_integrals(const InformedConstants& c, const TimeGrid& grid,
                                 std::vector<double>& f2, std::vector<double>& f0) {
    const int n = grid.n_steps;
    const double dt = grid.dt();
    const double h = 0.5 * dt;  // refined spacing: midpoints become nodes
    const int m2 = 2 * n;
    const double wq = std::exp(-c.theta * h);        // e^{-2 theta (h/2)}
    const double wh = std::exp(-2.0 * c.theta * h);  // e^{-2 theta h}

    auto w = [&](double u) {
        const double mu = informed_m(u, c);
        return mu * mu / (4.0 * c.kappa_harmonic);
    };

    std::vector<double> f2r(static_cast<std::size_t>(m2) + 1, 0.0);
    double w_right = w(grid.horizon);
    for (int k = m2 - 1; k >= 0; --k) {
        const double u_left = grid.horizon * k / m2;
        const double w_left = w(u_left);
        const double w_mid = w(u_left + 0.5 * h);
        const double local = (h / 6.0) * (w_left + 4.0 * w_mid * wq + w_right * wh);
        f2r[k] = local + wh * f2r[k + 1];
        w_right = w_left;
    }

    f2.assign(static_cast<std::size_t>(n) + 1, 0.0);
    f0.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) f2[k] = f2r[static_cast<std::size_t>(2) * k];
    const double e2 = c.eta * c.eta;
    for (int k = n - 1; k >= 0; --k) {
        const double mid = f2r[static_cast<std::size_t>(2) * k + 1];
        f0[k] = f0[k + 1] + e2 * (dt / 6.0) * (f2[k] + 4.0 * mid + f2[k + 1]);
    }
}

inline InformedSolution solve_informed(const MarketParams& p) {
    InformedSolution sol;
    sol.constants = informed_constants(p);
    sol.grid = p.grid();
    sol.kappa = p.kappa;
    const int n = sol.grid.n_steps;
    sol.m.resize(static_cast<std::size_t>(n) + 1);
    sol.h2.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = sol.grid.node(k);
        sol.m[k] = informed_m(t, sol.constants);
        sol.h2[k] = informed_h2(t, sol.constants);
    }
    informed_f_integrals(sol.constants, sol.grid, sol.f2, sol.f0);
    const int N = p.n_brokers;
    sol.omega0.assign(N, std::vector<double>(static_cast<std::size_t>(n) + 1));
    sol.omega1.assign(N, std::vector<double>(static_cast<std::size_t>(n) + 1));
    for (int j = 0; j < N; ++j) {
        for (int k = 0; k <= n; ++k) {
            sol.omega0[j][k] = sol.m[k] / (2.0 * p.kappa[j]);
            sol.omega1[j][k] = sol.h2[k] / p.kappa[j];
        }
    }
    return sol;
}

// Optimal speed toward each broker: omega_j = omega0_j(t) alpha + omega1_j(t) qI.
// kappa_i omega_i = kappa_j omega_j holds for all pairs.
inline std::vector<double> informed_speed(double t, double alpha, double qI,
                                          const InformedSolution& sol) {
    const double m = informed_m(t, sol.constants);
    const double h2 = informed_h2(t, sol.constants);
    std::vector<double> w(sol.kappa.size());
    for (std::size_t j = 0; j < sol.kappa.size(); ++j) {
        w[j] = m / (2.0 * sol.kappa[j]) * alpha + h2 / sol.kappa[j] * qI;
    }
    return w;
}

// Same feedback rule evaluated from the stored node arrays.
inline void informed_speed_at_node(int k, double alpha, double qI, const InformedSolution& sol,
                                   std::vector<double>& out) {
    const int N = sol.n_brokers();
    out.resize(N);
    for (int j = 0; j < N; ++j) out[j] = sol.omega0[j][k] * alpha + sol.omega1[j][k] * qI;
}

namespace detail {
// Linear interpolation of a node array at time t.
inline double lerp_grid(const std::vector<double>& v, const TimeGrid& grid, double t) {
    if (t <= 0.0) return v.front();
    if (t >= grid.horizon) return v.back();
    const double x = t / grid.dt();
    const int k = std::min(static_cast<int>(x), grid.n_steps - 1);
    const double w = x - k;
    return (1.0 - w) * v[k] + w * v[k + 1];
}
}  // namespace detail

// Value function H^I = x^I + S q^I + f0(t) + alpha^2 f2(t) + alpha m(t) q^I + h2(t) (q^I)^2.
// At t = T this reduces to x^I + S q^I - a_I (q^I)^2.
inline double informed_value(double t, double alpha, double S, double qI, double xI,
                             const InformedSolution& sol) {
    const double m = informed_m(t, sol.constants);
    const double h2 = informed_h2(t, sol.constants);
    const double f2 = detail::lerp_grid(sol.f2, sol.grid, t);
    const double f0 = detail::lerp_grid(sol.f0, sol.grid, t);
    return xI + S * qI + f0 + alpha * alpha * f2 + alpha * m * qI + h2 * qI * qI;
}

// Worst-case measure drift y^{S*} = psi_I sigma q^I.
inline double worst_case_drift(double qI, double psi_informed, double sigma) {
    return psi_informed * sigma * qI;
}

// Total informed speed and inventory path inferred by broker `i` from the flow
// it observes: omega = (1 + sum_{j != i} kappa_i/kappa_j) omega_i and
// Qhat_t = qI0_est + int_0^t omega (left-endpoint rule).
struct InferredFlow {
    std::vector<double> total_speed;  // per node
    std::vector<double> inventory;    // per node
};

inline InferredFlow infer_total_and_inventory(const std::vector<double>& observed_omega_i, int i,
                                              const std::vector<double>& kappa, double qI0_est,
                                              const TimeGrid& grid) {
    double factor = 1.0;
    for (std::size_t j = 0; j < kappa.size(); ++j) {
        if (static_cast<int>(j) != i) factor += kappa[i] / kappa[j];
    }
    InferredFlow out;
    out.total_speed.resize(observed_omega_i.size());
    for (std::size_t k = 0; k < observed_omega_i.size(); ++k) {
        out.total_speed[k] = factor * observed_omega_i[k];
    }
    out.inventory.resize(observed_omega_i.size());
    const double dt = grid.dt();
    double q = qI0_est;
    for (std::size_t k = 0; k < out.inventory.size(); ++k) {
        out.inventory[k] = q;
        q += dt * out.total_speed[k];
    }
    return out;
}

// Signal recovered from the flow broker `i` observes, given an inventory
// estimate: alpha = (omega_i - omega1_i(t) Qhat) / omega0_i(t). Undefined at
// t = T where omega0 vanishes.
inline double extract_alpha(double omega_i, double qI_hat, double t, int i,
                            const InformedSolution& sol) {
    const double w0 = sol.omega0_at(i, t);
    if (std::abs(w0) < 1e-12) {
        std::ostringstream oss;
        oss << "alpha extraction undefined at t = " << t << ": omega0 vanishes near maturity";
        throw NumericalError(oss.str());
    }
    return (omega_i - sol.omega1_at(i, t) * qI_hat) / w0;
}

}  // namespace liqgame
