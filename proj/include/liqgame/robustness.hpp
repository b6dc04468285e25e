#pragma once

#include <cstdint>
#include <vector>

#include "liqgame/simulate.hpp"

namespace liqgame {

// Sweep of true informed initial inventories against a fixed broker estimate.
struct RobustnessScenario {
    std::vector<double> q0_sweep;
    double q0_hat = 0.0;
    SimulationConfig sim;
};

// Per sweep point: paired differences (full information minus misspecified)
// of each broker's criterion and P&L.
struct RobustnessPoint {
    double q0 = 0.0;
    std::vector<double> gap_criterion_mean, gap_criterion_stderr;
    std::vector<double> gap_pnl_mean, gap_pnl_stderr;
};

// For each true Q_0^I, simulates the market twice on common random numbers:
// once with brokers reading the true informed state, once with brokers acting
// on the estimate built from the observed flow and the assumed initial
// inventory. The informed trader always acts on the true state; the same
// shocks are reused across sweep points. Strategies are never re-solved, only
// their state inputs change.
inline std::vector<RobustnessPoint> misspecified_ensemble(const RobustnessScenario& scn,
                                                          const MarketParams& params,
                                                          const InformedSolution& informed,
                                                          const BrokerCoefficients& coeffs) {
    if (scn.q0_sweep.empty()) throw ValidationError({"robustness sweep must be nonempty"});
    const int N = params.n_brokers;
    const int P = scn.sim.n_paths;
    std::vector<RobustnessPoint> out;
    out.reserve(scn.q0_sweep.size());

    for (double q0 : scn.q0_sweep) {
        MarketParams p = params;
        p.qI0 = q0;
        const SimEngine exact(p, informed, coeffs, 0.0);
        const SimEngine misspec(p, informed, coeffs, scn.q0_hat - q0);

        std::vector<std::vector<double>> d_crit(N, std::vector<double>(P));
        std::vector<std::vector<double>> d_pnl(N, std::vector<double>(P));
        parallel_chunks(P, [&](int, int begin, int end) {
            PathRecord rec_a, rec_b;
            for (int path = begin; path < end; ++path) {
                PathShocks shocks_a(scn.sim.seed, static_cast<std::uint64_t>(path), N);
                PathShocks shocks_b(scn.sim.seed, static_cast<std::uint64_t>(path), N);
                exact.run_path(shocks_a, rec_a);
                misspec.run_path(shocks_b, rec_b);
                const PathSummary sa = exact.summarize(rec_a);
                const PathSummary sb = misspec.summarize(rec_b);
                for (int i = 0; i < N; ++i) {
                    d_crit[i][path] = sa.criterion[i] - sb.criterion[i];
                    d_pnl[i][path] = sa.pnl[i] - sb.pnl[i];
                }
            }
        });

        RobustnessPoint pt;
        pt.q0 = q0;
        pt.gap_criterion_mean.resize(N);
        pt.gap_criterion_stderr.resize(N);
        pt.gap_pnl_mean.resize(N);
        pt.gap_pnl_stderr.resize(N);
        for (int i = 0; i < N; ++i) {
            pt.gap_criterion_mean[i] = mean(d_crit[i]);
            pt.gap_criterion_stderr[i] = P > 1 ? standard_error(d_crit[i]) : 0.0;
            pt.gap_pnl_mean[i] = mean(d_pnl[i]);
            pt.gap_pnl_stderr[i] = P > 1 ? standard_error(d_pnl[i]) : 0.0;
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace liqgame
