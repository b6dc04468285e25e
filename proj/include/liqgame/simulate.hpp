#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "liqgame/broker.hpp"
#include "liqgame/informed.hpp"
#include "liqgame/parallel.hpp"
#include "liqgame/params.hpp"
#include "liqgame/rng.hpp"
#include "liqgame/stats.hpp"

namespace liqgame {

struct SimulationConfig {
    int n_paths = 4000;
    std::uint64_t seed = 1;
    int store_paths = 0;  // leading paths exported with full trajectories
};

// Full state trajectories of one simulated path. S_ref tracks the mid-price
// under the informed trader's reference model (signal drift only, no
// permanent impact) on the same shocks; it backs the reference-measure form
// of the informed criterion.
struct PathRecord {
    TimeGrid grid;
    std::vector<double> S, S_ref, alpha, QI, XI, XI_ref;
    std::vector<std::vector<double>> u, omega, nu, nu_tilde, Q, X;

    void resize(int N, const TimeGrid& g) {
        grid = g;
        const std::size_t n = static_cast<std::size_t>(g.n_steps) + 1;
        S.assign(n, 0.0);
        S_ref.assign(n, 0.0);
        alpha.assign(n, 0.0);
        QI.assign(n, 0.0);
        XI.assign(n, 0.0);
        XI_ref.assign(n, 0.0);
        u.assign(N, std::vector<double>(n, 0.0));
        omega.assign(N, std::vector<double>(n, 0.0));
        nu.assign(N, std::vector<double>(n, 0.0));
        nu_tilde.assign(N, std::vector<double>(n, 0.0));
        Q.assign(N, std::vector<double>(n, 0.0));
        X.assign(N, std::vector<double>(n, 0.0));
    }
};

// Terminal objectives of one path, with running penalties accumulated by the
// left-endpoint rule.
struct PathSummary {
    std::vector<double> criterion;  // per broker
    std::vector<double> pnl;        // per broker
    double informed_criterion_ref = 0.0;
    double informed_criterion_market = 0.0;
};

// Euler-Maruyama engine for the coupled market under feedback controls.
// delta_q_hat is the brokers' informed-inventory estimation error
// (Qhat - Q^I); zero reproduces the full-information equilibrium bit for bit.
// The signal estimate follows the exact propagation identity
// alpha_hat = alpha - omega1(t)/omega0(t) * delta_q_hat.
class SimEngine {
public:
    SimEngine(const MarketParams& p, const InformedSolution& informed,
              const BrokerCoefficients& coeffs, double delta_q_hat = 0.0)
        : p_(p),
          informed_(informed),
          coeffs_(coeffs),
          delta_q_hat_(delta_q_hat),
          chol_(correlation_root(p.rho, p.n_brokers)) {}

    template <class Shocks>
    void run_path(Shocks&& shocks, PathRecord& rec) const {
        const int N = p_.n_brokers;
        const TimeGrid grid = p_.grid();
        const int n = grid.n_steps;
        const double dt = grid.dt();
        const double sdt = std::sqrt(dt);
        rec.resize(N, grid);

        double S = p_.s0, S_ref = p_.s0, alpha = p_.alpha0, QI = p_.qI0, XI = p_.xI0,
               XI_ref = p_.xI0;
        std::vector<double> u = p_.u0, q = p_.q0, x = p_.x0;
        std::vector<double> xi_flow(N), du(N), omega(N);
        FeedbackState st;
        st.q.resize(N);
        st.u.resize(N);

        for (int k = 0; k <= n; ++k) {
            informed_speed_at_node(k, alpha, QI, informed_, omega);
            // Brokers act on their inventory estimate and the signal they back
            // out of the observed flow. At t = T the alpha loading x^i_i
            // vanishes, so the (there undefined) extraction is never used.
            st.qI = QI + delta_q_hat_;
            st.alpha = (k < n) ? alpha - 2.0 * informed_.h2[k] / informed_.m[k] * delta_q_hat_
                               : alpha;
            for (int j = 0; j < N; ++j) {
                st.q[j] = q[j];
                st.u[j] = u[j];
            }

            rec.S[k] = S;
            rec.S_ref[k] = S_ref;
            rec.alpha[k] = alpha;
            rec.QI[k] = QI;
            rec.XI[k] = XI;
            rec.XI_ref[k] = XI_ref;
            double impact = 0.0;
            for (int i = 0; i < N; ++i) {
                const double nu_i = broker_feedback_speed(k, i, st, coeffs_, p_);
                rec.u[i][k] = u[i];
                rec.omega[i][k] = omega[i];
                rec.nu[i][k] = nu_i;
                rec.nu_tilde[i][k] = nu_i - omega[i] - u[i];
                rec.Q[i][k] = q[i];
                rec.X[i][k] = x[i];
                impact += p_.b[i] * nu_i;
            }
            if (k == n) break;

            double xi_price = 0.0, xi_signal = 0.0;
            shocks.next(xi_price, xi_signal, xi_flow);

            double omega_tot = 0.0;
            for (int j = 0; j < N; ++j) {
                const double nu_j = rec.nu[j][k];
                x[j] += (u[j] * (S + p_.c[j] * u[j]) + omega[j] * (S + p_.kappa[j] * omega[j]) -
                         nu_j * (S + p_.k[j] * nu_j)) *
                        dt;
                q[j] += (nu_j - u[j] - omega[j]) * dt;
                XI -= (S + p_.kappa[j] * omega[j]) * omega[j] * dt;
                XI_ref -= (S_ref + p_.kappa[j] * omega[j]) * omega[j] * dt;
                omega_tot += omega[j];
            }
            QI += omega_tot * dt;

            S += (impact + alpha) * dt + p_.sigma * sdt * xi_price;
            S_ref += alpha * dt + p_.sigma * sdt * xi_price;
            alpha += -p_.theta * alpha * dt + p_.eta * sdt * xi_signal;
            for (int i = 0; i < N; ++i) {
                double corr = 0.0;
                for (int j = 0; j <= i; ++j) {
                    corr += chol_[static_cast<std::size_t>(i) * N + j] * xi_flow[j];
                }
                du[i] = -p_.theta_u[i] * u[i] * dt + p_.eta_u[i] * sdt * corr;
            }
            for (int i = 0; i < N; ++i) u[i] += du[i];

            for (int i = 0; i < N; ++i) {
                if (!std::isfinite(q[i]) || !std::isfinite(x[i]) || !std::isfinite(u[i])) {
                    fail(k);
                }
            }
            if (!std::isfinite(S) || !std::isfinite(alpha) || !std::isfinite(QI)) fail(k);
        }
    }

    PathSummary summarize(const PathRecord& rec) const {
        const int N = p_.n_brokers;
        const int n = rec.grid.n_steps;
        const double dt = rec.grid.dt();
        PathSummary out;
        out.criterion.resize(N);
        out.pnl.resize(N);
        for (int i = 0; i < N; ++i) {
            double pen = 0.0;
            for (int k = 0; k < n; ++k) pen += rec.Q[i][k] * rec.Q[i][k];
            const double wealth = rec.X[i][n] + rec.Q[i][n] * rec.S[n];
            out.pnl[i] = wealth;
            out.criterion[i] =
                wealth - p_.a[i] * rec.Q[i][n] * rec.Q[i][n] - p_.phi[i] * pen * dt;
        }
        double penI = 0.0;
        for (int k = 0; k < n; ++k) penI += rec.QI[k] * rec.QI[k];
        penI *= dt;
        const double phi_eff = 0.5 * p_.psi_informed * p_.sigma * p_.sigma + p_.phi_informed;
        const double aq2 = p_.a_informed * rec.QI[n] * rec.QI[n];
        out.informed_criterion_ref =
            rec.XI_ref[n] + rec.QI[n] * rec.S_ref[n] - aq2 - phi_eff * penI;
        out.informed_criterion_market =
            rec.XI[n] + rec.QI[n] * rec.S[n] - aq2 - phi_eff * penI;
        return out;
    }

private:
    [[noreturn]] void fail(int k) const {
        std::ostringstream oss;
        oss << "simulated path produced a non-finite state at node " << (k + 1);
        throw NumericalError(oss.str());
    }

    const MarketParams& p_;
    const InformedSolution& informed_;
    const BrokerCoefficients& coeffs_;
    double delta_q_hat_;
    std::vector<double> chol_;
};

inline PathRecord simulate_path(const MarketParams& p, const InformedSolution& informed,
                                const BrokerCoefficients& coeffs, const SimulationConfig& cfg,
                                int path_index) {
    SimEngine engine(p, informed, coeffs);
    PathShocks shocks(cfg.seed, static_cast<std::uint64_t>(path_index), p.n_brokers);
    PathRecord rec;
    engine.run_path(shocks, rec);
    return rec;
}

// Aggregate path statistics of broker 1 (index 0): total informed volume,
// time-averaged inventory, speculative volume and informed-inventory volume
// of the net speed decomposition.
struct PathCharacteristics {
    double ZI = 0.0;
    double Qbar = 0.0;
    double Yalpha = 0.0;
    double YI = 0.0;
};

inline PathCharacteristics path_statistics(const PathRecord& rec,
                                           const NetSpeedCoefficients& net) {
    const int i = net.broker;
    const int n = rec.grid.n_steps;
    const double dt = rec.grid.dt();
    PathCharacteristics out;
    for (int k = 0; k < n; ++k) {
        out.ZI += std::abs(rec.omega[i][k]);
        out.Qbar += std::abs(rec.Q[i][k]);
        out.Yalpha += std::abs(net.r1[k] * rec.alpha[k]);
        out.YI += std::abs(net.r4[k] * rec.QI[k]);
    }
    out.ZI *= dt;
    out.Qbar *= dt / rec.grid.horizon;
    out.Yalpha *= dt;
    out.YI *= dt;
    return out;
}

// Ensemble estimates plus the per-path characteristic samples used by the
// scenario comparison tables.
struct EnsembleStats {
    int n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> criterion_mean, criterion_stderr;  // per broker
    std::vector<double> pnl_mean, pnl_stderr;
    double informed_criterion_mean = 0.0, informed_criterion_stderr = 0.0;
    double informed_market_mean = 0.0, informed_market_stderr = 0.0;
    std::vector<double> ZI, Qbar, Yalpha, YI;  // per path, broker 1
};

inline EnsembleStats monte_carlo(const MarketParams& p, const InformedSolution& informed,
                                 const BrokerCoefficients& coeffs, const SimulationConfig& cfg,
                                 std::vector<PathRecord>* stored = nullptr) {
    const int N = p.n_brokers;
    const int P = cfg.n_paths;
    SimEngine engine(p, informed, coeffs);
    const NetSpeedCoefficients net = net_speed_coefficients(coeffs, informed, 0, p);

    std::vector<std::vector<double>> crit(N, std::vector<double>(P));
    std::vector<std::vector<double>> pnl(N, std::vector<double>(P));
    std::vector<double> inf_ref(P), inf_mkt(P), zi(P), qbar(P), yal(P), yi(P);
    if (stored) stored->assign(std::min(cfg.store_paths, P), PathRecord{});

    parallel_chunks(P, [&](int, int begin, int end) {
        PathRecord rec;
        for (int path = begin; path < end; ++path) {
            PathShocks shocks(cfg.seed, static_cast<std::uint64_t>(path), N);
            engine.run_path(shocks, rec);
            const PathSummary s = engine.summarize(rec);
            for (int i = 0; i < N; ++i) {
                crit[i][path] = s.criterion[i];
                pnl[i][path] = s.pnl[i];
            }
            inf_ref[path] = s.informed_criterion_ref;
            inf_mkt[path] = s.informed_criterion_market;
            const PathCharacteristics ch = path_statistics(rec, net);
            zi[path] = ch.ZI;
            qbar[path] = ch.Qbar;
            yal[path] = ch.Yalpha;
            yi[path] = ch.YI;
            if (stored && path < static_cast<int>(stored->size())) (*stored)[path] = rec;
        }
    });

    EnsembleStats out;
    out.n_paths = P;
    out.seed = cfg.seed;
    out.criterion_mean.resize(N);
    out.criterion_stderr.resize(N);
    out.pnl_mean.resize(N);
    out.pnl_stderr.resize(N);
    for (int i = 0; i < N; ++i) {
        out.criterion_mean[i] = mean(crit[i]);
        out.criterion_stderr[i] = P > 1 ? standard_error(crit[i]) : 0.0;
        out.pnl_mean[i] = mean(pnl[i]);
        out.pnl_stderr[i] = P > 1 ? standard_error(pnl[i]) : 0.0;
    }
    out.informed_criterion_mean = mean(inf_ref);
    out.informed_criterion_stderr = P > 1 ? standard_error(inf_ref) : 0.0;
    out.informed_market_mean = mean(inf_mkt);
    out.informed_market_stderr = P > 1 ? standard_error(inf_mkt) : 0.0;
    out.ZI = std::move(zi);
    out.Qbar = std::move(qbar);
    out.Yalpha = std::move(yal);
    out.YI = std::move(yi);
    return out;
}

}  // namespace liqgame
