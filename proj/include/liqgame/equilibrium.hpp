#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>
#include <vector>

#include "liqgame/broker.hpp"
#include "liqgame/informed.hpp"
#include "liqgame/parallel.hpp"
#include "liqgame/params.hpp"

namespace liqgame {

// Search space and fixed-point settings of the two-broker liquidity price
// game. tol <= 0 selects one tenth of the kappa_2 grid spacing.
struct KappaGrid {
    double min1 = 0.0, max1 = 0.0;
    int count1 = 0;
    double min2 = 0.0, max2 = 0.0;
    int count2 = 0;
    double learning_rate = 0.2;  // in [0, 1)
    double tol = -1.0;
    int max_iters = 200;
    int init_index2 = -1;  // starting kappa_2 grid index; -1 = middle

    std::vector<double> axis1() const { return axis(min1, max1, count1); }
    std::vector<double> axis2() const { return axis(min2, max2, count2); }

    double spacing2() const { return (max2 - min2) / (count2 - 1); }
    double effective_tol() const { return tol > 0.0 ? tol : 0.1 * spacing2(); }

    void check() const {
        std::vector<std::string> issues;
        if (!(min1 > 0.0) || !(min2 > 0.0)) issues.push_back("kappa grid minima must be > 0");
        if (count1 < 2 || count2 < 2) issues.push_back("kappa grid needs at least 2 points per axis");
        if (!(max1 > min1) || !(max2 > min2)) issues.push_back("kappa grid maxima must exceed minima");
        if (!(learning_rate >= 0.0 && learning_rate < 1.0)) {
            issues.push_back("learning_rate must lie in [0, 1)");
        }
        if (max_iters < 1) issues.push_back("max_iters must be >= 1");
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }

private:
    static std::vector<double> axis(double lo, double hi, int count) {
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) {
            v[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        }
        return v;
    }
};

struct AgentValues {
    double v1 = 0.0, v2 = 0.0, vI = 0.0;
};

// Index of the maximum; ties keep the first (smallest kappa) entry.
inline int argmax_first(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

// Initial values of both brokers and the informed trader for a given pair of
// liquidity prices: substitute the kappas, solve the coefficient systems, and
// evaluate the value functions at t = 0 with all inventories zero.
inline AgentValues value_at(double kappa1, double kappa2, const MarketParams& base) {
    MarketParams p = base;
    p.kappa = {kappa1, kappa2};
    const InformedSolution informed = solve_informed(p);
    const BrokerCoefficients coeffs = solve_backward(p, informed.constants);
    FeedbackState st;
    st.alpha = p.alpha0;
    st.qI = 0.0;
    st.q.assign(p.n_brokers, 0.0);
    st.u = p.u0;
    AgentValues out;
    out.v1 = broker_value(0.0, 0, p.s0, st, p.x0[0], coeffs);
    out.v2 = broker_value(0.0, 1, p.s0, st, p.x0[1], coeffs);
    out.vI = informed_value(0.0, p.alpha0, p.s0, 0.0, p.xI0, informed);
    return out;
}

struct IterationStep {
    double kappa2 = 0.0;      // iterate before the update
    double br_kappa1 = 0.0;   // kappa_1*(kappa_2)
    double br_kappa2 = 0.0;   // kappa_2*(kappa_1*(kappa_2))
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, std::vector<IterationStep> trace)
        : std::runtime_error(msg), trace_(std::move(trace)) {}
    const std::vector<IterationStep>& trace() const { return trace_; }

private:
    std::vector<IterationStep> trace_;
};

struct EquilibriumResult {
    std::vector<double> axis1, axis2;
    std::vector<double> V1, V2, VI;  // surfaces, row-major [i1 * count2 + i2]
    std::vector<double> br1;         // kappa_1*(kappa_2) per axis2 point
    std::vector<double> br2;         // kappa_2*(kappa_1) per axis1 point
    double kappa1_star = 0.0, kappa2_star = 0.0;
    AgentValues star;
    std::vector<IterationStep> trace;
    int iterations = 0;
    bool nash_verified = false;
    std::vector<std::uint8_t> pareto_mask;  // both brokers strictly improve

    double surface(const std::vector<double>& V, int i1, int i2) const {
        return V[static_cast<std::size_t>(i1) * axis2.size() + i2];
    }
};

// Caches agent values per (kappa_1, kappa_2) so best-response scans, the
// surface fill and the final verification share ODE solves. Evaluations are
// embarrassingly parallel over cells.
class EquilibriumSolver {
public:
    EquilibriumSolver(const MarketParams& base, const KappaGrid& grid) : p_(base), grid_(grid) {
        grid_.check();
        if (p_.n_brokers != 2) {
            throw ValidationError({"the liquidity price equilibrium search supports exactly 2 brokers"});
        }
        axis1_ = grid_.axis1();
        axis2_ = grid_.axis2();
    }

    const MarketParams& params() const { return p_; }
    const KappaGrid& grid() const { return grid_; }

    AgentValues value(double kappa1, double kappa2) {
        const auto key = std::make_pair(kappa1, kappa2);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        AgentValues v = value_at(kappa1, kappa2, p_);
        std::lock_guard<std::mutex> lock(mu_);
        cache_.emplace(key, v);
        return v;
    }

    // Grid argmax of V^i against a fixed opponent price; ties break toward the
    // smaller kappa.
    double best_response(int broker, double kappa_other) {
        const std::vector<double>& axis = broker == 0 ? axis1_ : axis2_;
        std::vector<double> vals(axis.size());
        parallel_chunks(static_cast<int>(axis.size()), [&](int, int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const AgentValues v =
                    broker == 0 ? value(axis[i], kappa_other) : value(kappa_other, axis[i]);
                vals[i] = broker == 0 ? v.v1 : v.v2;
            }
        });
        return axis[argmax_first(vals)];
    }

    // Damped fixed-point iteration on kappa_2:
    //   kappa_2 <- (1 - lr) kappa_2 + lr * kappa_2*(kappa_1*(kappa_2)),
    // stopped when both the kappa_2 iterates and the kappa_1 best responses
    // move less than the tolerance. The returned pair is snapped to grid
    // points through the final best responses and checked against the
    // grid Nash definition by exhaustive unilateral deviation.
    EquilibriumResult nash_iterate() {
        const double lr = grid_.learning_rate;
        const double tol = grid_.effective_tol();
        const int i0 = grid_.init_index2 >= 0 ? grid_.init_index2
                                              : static_cast<int>(axis2_.size()) / 2;
        double kappa2 = axis2_.at(i0);

        EquilibriumResult res;
        res.axis1 = axis1_;
        res.axis2 = axis2_;

        double prev_br1 = std::numeric_limits<double>::quiet_NaN();
        bool converged = false;
        for (int it = 0; it < grid_.max_iters; ++it) {
            IterationStep step;
            step.kappa2 = kappa2;
            step.br_kappa1 = best_response(0, kappa2);
            step.br_kappa2 = best_response(1, step.br_kappa1);
            res.trace.push_back(step);
            const double next = (1.0 - lr) * kappa2 + lr * step.br_kappa2;
            const bool k2_done = std::abs(next - kappa2) < tol;
            const bool k1_done = !std::isnan(prev_br1) && std::abs(step.br_kappa1 - prev_br1) < tol;
            prev_br1 = step.br_kappa1;
            kappa2 = next;
            res.iterations = it + 1;
            if (k2_done && k1_done) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream oss;
            oss << "liquidity price iteration did not converge within " << grid_.max_iters
                << " iterations (tol " << tol << ")";
            throw ConvergenceError(oss.str(), res.trace);
        }

        const double k1_at_limit = best_response(0, kappa2);
        res.kappa2_star = best_response(1, k1_at_limit);
        res.kappa1_star = best_response(0, res.kappa2_star);
        res.star = value(res.kappa1_star, res.kappa2_star);
        res.nash_verified = verify_grid_nash(res.kappa1_star, res.kappa2_star);
        return res;
    }

    // Definition check on the grid: no unilateral grid deviation improves
    // either broker at (kappa_1*, kappa_2*).
    bool verify_grid_nash(double kappa1_star, double kappa2_star) {
        const AgentValues star = value(kappa1_star, kappa2_star);
        for (double k1 : axis1_) {
            if (value(k1, kappa2_star).v1 > star.v1) return false;
        }
        for (double k2 : axis2_) {
            if (value(kappa1_star, k2).v2 > star.v2) return false;
        }
        return true;
    }

    // Full value surfaces and both best-response curves.
    void fill_surfaces(EquilibriumResult& res) {
        const int c1 = static_cast<int>(axis1_.size());
        const int c2 = static_cast<int>(axis2_.size());
        res.axis1 = axis1_;
        res.axis2 = axis2_;
        res.V1.resize(static_cast<std::size_t>(c1) * c2);
        res.V2.resize(static_cast<std::size_t>(c1) * c2);
        res.VI.resize(static_cast<std::size_t>(c1) * c2);
        parallel_chunks(c1 * c2, [&](int, int begin, int end) {
            for (int cell = begin; cell < end; ++cell) {
                const int i1 = cell / c2;
                const int i2 = cell % c2;
                const AgentValues v = value(axis1_[i1], axis2_[i2]);
                res.V1[cell] = v.v1;
                res.V2[cell] = v.v2;
                res.VI[cell] = v.vI;
            }
        });
        res.br1.resize(c2);
        res.br2.resize(c1);
        for (int i2 = 0; i2 < c2; ++i2) res.br1[i2] = best_response(0, axis2_[i2]);
        for (int i1 = 0; i1 < c1; ++i1) res.br2[i1] = best_response(1, axis1_[i1]);
    }

    // Cells where both brokers strictly exceed their equilibrium value.
    void fill_pareto_mask(EquilibriumResult& res) {
        if (res.V1.empty()) fill_surfaces(res);
        const AgentValues star = value(res.kappa1_star, res.kappa2_star);
        res.pareto_mask.assign(res.V1.size(), 0);
        for (std::size_t cell = 0; cell < res.V1.size(); ++cell) {
            res.pareto_mask[cell] = (res.V1[cell] > star.v1 && res.V2[cell] > star.v2) ? 1 : 0;
        }
    }

private:
    MarketParams p_;
    KappaGrid grid_;
    std::vector<double> axis1_, axis2_;
    std::mutex mu_;
    std::map<std::pair<double, double>, AgentValues> cache_;
};

}  // namespace liqgame
