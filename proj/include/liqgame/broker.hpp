#pragma once

#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "liqgame/informed.hpp"
#include "liqgame/params.hpp"

namespace liqgame {

// Coefficients of the quadratic value ansatz of broker i,
//   h^i = f + g (q^I)^2 + m alpha^2 + sum n_{r,s} q^r q^s + sum p_{r,s} u^r u^s
//       + sum d_r q^I q^r + v q^I alpha + sum w_r q^I u^r + sum x_r alpha q^r
//       + sum y_{r,s} q^r u^s + sum z_r alpha u^r,
// flattened per broker as [f, g, m, v, d[N], w[N], x[N], z[N], n[NxN], p[NxN], y[NxN]].
//
// n and p are kept symmetric: only the combinations N_{r,s} = n_{r,s} + n_{s,r}
// and P_{r,s} = p_{r,s} + p_{s,r} enter the dynamics, the controls, and the
// value, so the symmetric representative is stored. y couples q^r to u^s and
// is a general matrix.
struct CoeffLayout {
    int N = 0;
    int d0() const { return 4; }
    int w0() const { return 4 + N; }
    int x0() const { return 4 + 2 * N; }
    int z0() const { return 4 + 3 * N; }
    int n0() const { return 4 + 4 * N; }
    int p0() const { return 4 + 4 * N + N * N; }
    int y0() const { return 4 + 4 * N + 2 * N * N; }
    int per_broker() const { return 4 + 4 * N + 3 * N * N; }
    int stride() const { return N * per_broker(); }
};

// Read-only view of one broker's block within a joint coefficient state.
struct BrokerBlock {
    const double* p = nullptr;
    int N = 0;

    double f() const { return p[0]; }
    double g() const { return p[1]; }
    double m() const { return p[2]; }
    double v() const { return p[3]; }
    double d(int r) const { return p[4 + r]; }
    double w(int r) const { return p[4 + N + r]; }
    double x(int r) const { return p[4 + 2 * N + r]; }
    double z(int r) const { return p[4 + 3 * N + r]; }
    double n(int r, int s) const { return p[4 + 4 * N + r * N + s]; }
    double pp(int r, int s) const { return p[4 + 4 * N + N * N + r * N + s]; }
    double y(int r, int s) const { return p[4 + 4 * N + 2 * N * N + r * N + s]; }
    double Nsym(int r, int s) const { return n(r, s) + n(s, r); }
    double Psym(int r, int s) const { return pp(r, s) + pp(s, r); }
};

// Joint solution of the broker coefficient ODE system on the time grid.
struct BrokerCoefficients {
    int N = 0;
    TimeGrid grid;
    std::vector<double> data;  // (n_steps + 1) * layout.stride()

    CoeffLayout layout() const { return CoeffLayout{N}; }
    const double* node(int k) const {
        return data.data() + static_cast<std::size_t>(k) * layout().stride();
    }
    double* node_mut(int k) {
        return data.data() + static_cast<std::size_t>(k) * layout().stride();
    }
    BrokerBlock broker(int k, int i) const {
        return BrokerBlock{node(k) + static_cast<std::size_t>(i) * layout().per_broker(), N};
    }
};

// All coefficients vanish at t = T except n^i_{i,i}(T) = -a_i.
inline std::vector<double> terminal_conditions(const MarketParams& p) {
    CoeffLayout lay{p.n_brokers};
    std::vector<double> state(lay.stride(), 0.0);
    for (int i = 0; i < p.n_brokers; ++i) {
        state[static_cast<std::size_t>(i) * lay.per_broker() + lay.n0() + i * p.n_brokers + i] =
            -p.a[i];
    }
    return state;
}

// Time derivative of the joint coefficient state.
//
// The derivative is produced by matching monomial coefficients of the h^i PDE:
// every PDE term is a product of linear forms in (alpha, q^I, q^1..q^N,
// u^1..u^N) (or a constant), so its contribution is accumulated into a
// symmetric source matrix S plus a scalar, and the coefficient derivatives are
// read back from S. The forms are
//   A_j = grad_{q^j} h^j + b_j q^j   (2 k_j nu^{j*}, broker j's own control)
//   B_j = grad_{q^j} h^i + b_j q^i
// and the informed feedback enters through omega_j = omega0_j(t) alpha +
// omega1_j(t) q^I.
class BrokerOdeRhs {
public:
    BrokerOdeRhs(const MarketParams& p, const InformedConstants& ic)
        : p_(p), ic_(ic), lay_{p.n_brokers}, dim_(2 + 2 * p.n_brokers) {
        const int N = p_.n_brokers;
        omega0_.resize(N);
        omega1_.resize(N);
        A_.resize(static_cast<std::size_t>(N) * dim_);
        B_.resize(static_cast<std::size_t>(N) * dim_);
        G_.resize(static_cast<std::size_t>(N) * dim_);
        S_.resize(static_cast<std::size_t>(dim_) * dim_);
        form_a_.resize(dim_);
        form_b_.resize(dim_);
    }

    // Basis order inside the linear forms: [alpha, q^I, q^1..q^N, u^1..u^N].
    int iq(int j) const { return 2 + j; }
    int iu(int j) const { return 2 + p_.n_brokers + j; }

    void operator()(double t, const double* state, double* out) {
        const int N = p_.n_brokers;
        const double m = informed_m(t, ic_);
        const double h2 = informed_h2(t, ic_);
        double om0_tot = 0.0, om1_tot = 0.0;
        for (int j = 0; j < N; ++j) {
            omega0_[j] = m / (2.0 * p_.kappa[j]);
            omega1_[j] = h2 / p_.kappa[j];
            om0_tot += omega0_[j];
            om1_tot += omega1_[j];
        }

        for (int j = 0; j < N; ++j) {
            BrokerBlock bj{state + static_cast<std::size_t>(j) * lay_.per_broker(), N};
            double* A = A_.data() + static_cast<std::size_t>(j) * dim_;
            std::fill(A, A + dim_, 0.0);
            A[0] = bj.x(j);
            A[1] = bj.d(j);
            for (int s = 0; s < N; ++s) A[iq(s)] = bj.Nsym(j, s) + (s == j ? p_.b[j] : 0.0);
            for (int s = 0; s < N; ++s) A[iu(s)] = bj.y(j, s);
        }

        for (int i = 0; i < N; ++i) {
            BrokerBlock bi{state + static_cast<std::size_t>(i) * lay_.per_broker(), N};
            std::fill(S_.begin(), S_.end(), 0.0);
            double s0 = 0.0;

            for (int j = 0; j < N; ++j) {
                double* G = G_.data() + static_cast<std::size_t>(j) * dim_;
                double* B = B_.data() + static_cast<std::size_t>(j) * dim_;
                std::fill(G, G + dim_, 0.0);
                G[0] = bi.x(j);
                G[1] = bi.d(j);
                for (int s = 0; s < N; ++s) G[iq(s)] = bi.Nsym(j, s);
                for (int s = 0; s < N; ++s) G[iu(s)] = bi.y(j, s);
                std::copy(G, G + dim_, B);
                B[iq(i)] += p_.b[j];
            }

            // alpha q^i source and the inventory penalty.
            add_entry(0, iq(i), 1.0);
            add_entry(iq(i), iq(i), -p_.phi[i]);

            // -(u^j + omega^j) . grad_{q^j} h^i
            for (int j = 0; j < N; ++j) {
                std::fill(form_a_.begin(), form_a_.end(), 0.0);
                form_a_[0] = omega0_[j];
                form_a_[1] = omega1_[j];
                form_a_[iu(j)] = 1.0;
                add_outer(form_a_.data(), G_.data() + static_cast<std::size_t>(j) * dim_, -1.0);
            }

            // kappa_i (omega^i)^2 and c_i (u^i)^2
            std::fill(form_a_.begin(), form_a_.end(), 0.0);
            form_a_[0] = omega0_[i];
            form_a_[1] = omega1_[i];
            add_outer(form_a_.data(), form_a_.data(), p_.kappa[i]);
            add_entry(iu(i), iu(i), p_.c[i]);

            // generator of alpha: -theta alpha d_alpha h + eta^2/2 * d^2_alpha h
            std::fill(form_a_.begin(), form_a_.end(), 0.0);
            std::fill(form_b_.begin(), form_b_.end(), 0.0);
            form_a_[0] = 1.0;
            form_b_[0] = 2.0 * bi.m();
            form_b_[1] = bi.v();
            for (int r = 0; r < N; ++r) form_b_[iq(r)] = bi.x(r);
            for (int r = 0; r < N; ++r) form_b_[iu(r)] = bi.z(r);
            add_outer(form_a_.data(), form_b_.data(), -p_.theta);
            s0 += p_.eta * p_.eta * bi.m();

            // generator of the uninformed flows
            for (int j = 0; j < N; ++j) {
                std::fill(form_a_.begin(), form_a_.end(), 0.0);
                std::fill(form_b_.begin(), form_b_.end(), 0.0);
                form_a_[iu(j)] = 1.0;
                form_b_[0] = bi.z(j);
                form_b_[1] = bi.w(j);
                for (int s = 0; s < N; ++s) form_b_[iq(s)] = bi.y(s, j);
                for (int s = 0; s < N; ++s) form_b_[iu(s)] = bi.Psym(j, s);
                add_outer(form_a_.data(), form_b_.data(), -p_.theta_u[j]);
            }
            for (int j = 0; j < N; ++j) {
                for (int l = 0; l < N; ++l) {
                    s0 += 0.5 * p_.eta_u[j] * p_.eta_u[l] * p_.rho_at(j, l) * bi.Psym(j, l);
                }
            }

            // (sum_j omega^j) d_{q^I} h^i
            std::fill(form_a_.begin(), form_a_.end(), 0.0);
            std::fill(form_b_.begin(), form_b_.end(), 0.0);
            form_a_[0] = om0_tot;
            form_a_[1] = om1_tot;
            form_b_[0] = bi.v();
            form_b_[1] = 2.0 * bi.g();
            for (int r = 0; r < N; ++r) form_b_[iq(r)] = bi.d(r);
            for (int r = 0; r < N; ++r) form_b_[iu(r)] = bi.w(r);
            add_outer(form_a_.data(), form_b_.data(), 1.0);

            // sum_j A_j B_j / (2 k_j)  -  B_i^2 / (4 k_i)
            for (int j = 0; j < N; ++j) {
                add_outer(A_.data() + static_cast<std::size_t>(j) * dim_,
                          B_.data() + static_cast<std::size_t>(j) * dim_, 0.5 / p_.k[j]);
            }
            add_outer(B_.data() + static_cast<std::size_t>(i) * dim_,
                      B_.data() + static_cast<std::size_t>(i) * dim_, -0.25 / p_.k[i]);

            // Read the coefficient derivatives back off the source matrix.
            double* o = out + static_cast<std::size_t>(i) * lay_.per_broker();
            o[0] = -s0;
            o[1] = -S(1, 1);
            o[2] = -S(0, 0);
            o[3] = -2.0 * S(0, 1);
            for (int r = 0; r < N; ++r) o[lay_.d0() + r] = -2.0 * S(1, iq(r));
            for (int r = 0; r < N; ++r) o[lay_.w0() + r] = -2.0 * S(1, iu(r));
            for (int r = 0; r < N; ++r) o[lay_.x0() + r] = -2.0 * S(0, iq(r));
            for (int r = 0; r < N; ++r) o[lay_.z0() + r] = -2.0 * S(0, iu(r));
            for (int r = 0; r < N; ++r) {
                for (int s = 0; s < N; ++s) {
                    o[lay_.n0() + r * N + s] = -S(iq(r), iq(s));
                    o[lay_.p0() + r * N + s] = -S(iu(r), iu(s));
                    o[lay_.y0() + r * N + s] = -2.0 * S(iq(r), iu(s));
                }
            }
        }
    }

private:
    double S(int x, int y) const { return S_[static_cast<std::size_t>(x) * dim_ + y]; }

    void add_entry(int x, int y, double c) {
        if (x == y) {
            S_[static_cast<std::size_t>(x) * dim_ + x] += c;
        } else {
            S_[static_cast<std::size_t>(x) * dim_ + y] += 0.5 * c;
            S_[static_cast<std::size_t>(y) * dim_ + x] += 0.5 * c;
        }
    }

    // S += c * sym(a b^T): the quadratic form gains c * (a.s)(b.s).
    void add_outer(const double* a, const double* b, double c) {
        for (int x = 0; x < dim_; ++x) {
            const double cax = c * a[x];
            const double cbx = c * b[x];
            if (cax == 0.0 && cbx == 0.0) continue;
            double* row = S_.data() + static_cast<std::size_t>(x) * dim_;
            for (int y = 0; y < dim_; ++y) row[y] += 0.5 * (cax * b[y] + cbx * a[y]);
        }
    }

    const MarketParams& p_;
    const InformedConstants& ic_;
    CoeffLayout lay_;
    int dim_;
    std::vector<double> omega0_, omega1_;
    std::vector<double> A_, B_, G_, S_;
    std::vector<double> form_a_, form_b_;
};

enum class OdeScheme { Euler, RK4 };

// Backward sweep from the terminal conditions over the shared grid:
// coeffs(t_k) = coeffs(t_{k+1}) - dt * rhs(t_{k+1}) in Euler mode, classic
// fourth-order Runge-Kutta otherwise. Throws NumericalError naming the time of
// failure when the sweep produces a non-finite value.
inline BrokerCoefficients solve_backward(const MarketParams& p, const InformedConstants& ic,
                                         OdeScheme scheme = OdeScheme::Euler) {
    BrokerCoefficients out;
    out.N = p.n_brokers;
    out.grid = p.grid();
    const CoeffLayout lay = out.layout();
    const int n = out.grid.n_steps;
    const int stride = lay.stride();
    out.data.assign(static_cast<std::size_t>(n + 1) * stride, 0.0);

    auto terminal = terminal_conditions(p);
    std::copy(terminal.begin(), terminal.end(), out.node_mut(n));

    BrokerOdeRhs rhs(p, ic);
    const double dt = out.grid.dt();
    std::vector<double> k1(stride), k2(stride), k3(stride), k4(stride), tmp(stride);

    for (int k = n - 1; k >= 0; --k) {
        const double t1 = out.grid.node(k + 1);
        const double* cur = out.node(k + 1);
        double* nxt = out.node_mut(k);
        if (scheme == OdeScheme::Euler) {
            rhs(t1, cur, k1.data());
            for (int j = 0; j < stride; ++j) nxt[j] = cur[j] - dt * k1[j];
        } else {
            const double th = t1 - 0.5 * dt;
            rhs(t1, cur, k1.data());
            for (int j = 0; j < stride; ++j) tmp[j] = cur[j] - 0.5 * dt * k1[j];
            rhs(th, tmp.data(), k2.data());
            for (int j = 0; j < stride; ++j) tmp[j] = cur[j] - 0.5 * dt * k2[j];
            rhs(th, tmp.data(), k3.data());
            for (int j = 0; j < stride; ++j) tmp[j] = cur[j] - dt * k3[j];
            rhs(t1 - dt, tmp.data(), k4.data());
            for (int j = 0; j < stride; ++j) {
                nxt[j] = cur[j] - dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        for (int j = 0; j < stride; ++j) {
            if (!std::isfinite(nxt[j])) {
                std::ostringstream oss;
                oss << "broker coefficient ODE blew up at t = " << out.grid.node(k)
                    << " (node " << k << ")";
                throw NumericalError(oss.str());
            }
        }
    }
    return out;
}

// Market state slice the broker controls depend on.
struct FeedbackState {
    double alpha = 0.0;
    double qI = 0.0;
    std::vector<double> q;  // broker inventories
    std::vector<double> u;  // uninformed speeds
};

// nu^{i*} = [x^i_i alpha + b_i q^i + d^i_i q^I + sum_j N^i_{j,i} q^j
//            + sum_j y^i_{i,j} u^j] / (2 k_i), from the node-k coefficients.
inline double broker_feedback_speed(int k, int i, const FeedbackState& st,
                                    const BrokerCoefficients& coeffs, const MarketParams& p) {
    const BrokerBlock bi = coeffs.broker(k, i);
    double num = bi.x(i) * st.alpha + p.b[i] * st.q[i] + bi.d(i) * st.qI;
    for (int j = 0; j < coeffs.N; ++j) num += bi.Nsym(j, i) * st.q[j];
    for (int j = 0; j < coeffs.N; ++j) num += bi.y(i, j) * st.u[j];
    return num / (2.0 * p.k[i]);
}

inline std::vector<double> broker_feedback_speeds(int k, const FeedbackState& st,
                                                  const BrokerCoefficients& coeffs,
                                                  const MarketParams& p) {
    std::vector<double> nu(coeffs.N);
    for (int i = 0; i < coeffs.N; ++i) nu[i] = broker_feedback_speed(k, i, st, coeffs, p);
    return nu;
}

// h^i evaluated at one grid node.
inline double broker_h(int k, int i, const FeedbackState& st, const BrokerCoefficients& coeffs) {
    const BrokerBlock b = coeffs.broker(k, i);
    const int N = coeffs.N;
    double h = b.f() + b.g() * st.qI * st.qI + b.m() * st.alpha * st.alpha +
               b.v() * st.qI * st.alpha;
    for (int r = 0; r < N; ++r) {
        h += b.d(r) * st.qI * st.q[r];
        h += b.w(r) * st.qI * st.u[r];
        h += b.x(r) * st.alpha * st.q[r];
        h += b.z(r) * st.alpha * st.u[r];
        for (int s = 0; s < N; ++s) {
            h += b.n(r, s) * st.q[r] * st.q[s];
            h += b.pp(r, s) * st.u[r] * st.u[s];
            h += b.y(r, s) * st.q[r] * st.u[s];
        }
    }
    return h;
}

// H^i = x^i + q^i S + h^i with the coefficient functions interpolated
// linearly between grid nodes. At t = T this is x^i + q^i S - a_i (q^i)^2.
inline double broker_value(double t, int i, double S, const FeedbackState& st, double cash_i,
                           const BrokerCoefficients& coeffs) {
    const TimeGrid& g = coeffs.grid;
    double h;
    if (t <= 0.0) {
        h = broker_h(0, i, st, coeffs);
    } else if (t >= g.horizon) {
        h = broker_h(g.n_steps, i, st, coeffs);
    } else {
        const double x = t / g.dt();
        const int k = std::min(static_cast<int>(x), g.n_steps - 1);
        const double w = x - k;
        h = (1.0 - w) * broker_h(k, i, st, coeffs) + w * broker_h(k + 1, i, st, coeffs);
    }
    return cash_i + st.q[i] * S + h;
}

// Left side of the h^i PDE evaluated pointwise from the solved coefficient
// trajectories, with the time derivative taken by finite differences across
// neighbouring nodes (fourth-order central where available). For a correct
// transcription this decreases at the order of the solver under grid
// refinement; it is the independent check on the coefficient ODE system.
inline std::vector<double> pde_residual(int k, const FeedbackState& st,
                                        const BrokerCoefficients& coeffs, const MarketParams& p,
                                        const InformedSolution& informed) {
    const int N = coeffs.N;
    const int n = coeffs.grid.n_steps;
    const double dt = coeffs.grid.dt();
    const double t = coeffs.grid.node(k);
    if (k <= 0 || k >= n) throw std::invalid_argument("pde_residual requires an interior node");

    const double m_t = informed_m(t, informed.constants);
    const double h2_t = informed_h2(t, informed.constants);
    std::vector<double> omega(N), dqh_own(N);
    for (int j = 0; j < N; ++j) {
        omega[j] = m_t / (2.0 * p.kappa[j]) * st.alpha + h2_t / p.kappa[j] * st.qI;
    }
    double omega_tot = 0.0;
    for (int j = 0; j < N; ++j) omega_tot += omega[j];

    // grad_{q^j} h^j + b_j q^j for every broker (own-control forms).
    for (int j = 0; j < N; ++j) {
        const BrokerBlock bj = coeffs.broker(k, j);
        double v = bj.d(j) * st.qI + bj.x(j) * st.alpha + p.b[j] * st.q[j];
        for (int s = 0; s < N; ++s) v += bj.Nsym(j, s) * st.q[s] + bj.y(j, s) * st.u[s];
        dqh_own[j] = v;
    }

    std::vector<double> res(N, 0.0);
    for (int i = 0; i < N; ++i) {
        const BrokerBlock bi = coeffs.broker(k, i);

        double dh_dt;
        if (k >= 2 && k <= n - 2) {
            dh_dt = (-broker_h(k + 2, i, st, coeffs) + 8.0 * broker_h(k + 1, i, st, coeffs) -
                     8.0 * broker_h(k - 1, i, st, coeffs) + broker_h(k - 2, i, st, coeffs)) /
                    (12.0 * dt);
        } else {
            dh_dt = (broker_h(k + 1, i, st, coeffs) - broker_h(k - 1, i, st, coeffs)) / (2.0 * dt);
        }

        double r = dh_dt + st.alpha * st.q[i] - p.phi[i] * st.q[i] * st.q[i];

        for (int j = 0; j < N; ++j) {
            double dqj = bi.d(j) * st.qI + bi.x(j) * st.alpha;
            for (int s = 0; s < N; ++s) dqj += bi.Nsym(j, s) * st.q[s] + bi.y(j, s) * st.u[s];
            r -= (st.u[j] + omega[j]) * dqj;
            const double bji = dqj + p.b[j] * st.q[i];
            r += 0.5 / p.k[j] * dqh_own[j] * bji;
            if (j == i) r -= 0.25 / p.k[i] * bji * bji;
        }

        r += p.kappa[i] * omega[i] * omega[i] + p.c[i] * st.u[i] * st.u[i];

        double dalpha = 2.0 * bi.m() * st.alpha + bi.v() * st.qI;
        for (int s = 0; s < N; ++s) dalpha += bi.x(s) * st.q[s] + bi.z(s) * st.u[s];
        r += -p.theta * st.alpha * dalpha + 0.5 * p.eta * p.eta * 2.0 * bi.m();

        for (int j = 0; j < N; ++j) {
            double du = bi.w(j) * st.qI + bi.z(j) * st.alpha;
            for (int s = 0; s < N; ++s) du += bi.y(s, j) * st.q[s] + bi.Psym(j, s) * st.u[s];
            r -= p.theta_u[j] * st.u[j] * du;
            for (int l = 0; l < N; ++l) {
                r += 0.5 * p.eta_u[j] * p.eta_u[l] * p.rho_at(j, l) * bi.Psym(j, l);
            }
        }

        double dqI = 2.0 * bi.g() * st.qI + bi.v() * st.alpha;
        for (int s = 0; s < N; ++s) dqI += bi.d(s) * st.q[s] + bi.w(s) * st.u[s];
        r += omega_tot * dqI;

        res[i] = r;
    }
    return res;
}

// Coefficients of the net trading speed nu~^i = nu^i - omega^i - u^i,
//   nu~^i = r1 alpha + r2 q^i + sum_{j!=i} r3_j q^j + r4 q^I + r5 u^i
//           + sum_{j!=i} r6_j u^j.
// r3 and r6 store a full broker-indexed column with the own slot zero.
struct NetSpeedCoefficients {
    int broker = 0;
    std::vector<double> r1, r2, r4, r5;       // per node
    std::vector<std::vector<double>> r3, r6;  // [other broker][node], own column zero
};

inline NetSpeedCoefficients net_speed_coefficients(const BrokerCoefficients& coeffs,
                                                   const InformedSolution& informed, int i,
                                                   const MarketParams& p) {
    const int N = coeffs.N;
    const int n = coeffs.grid.n_steps;
    NetSpeedCoefficients out;
    out.broker = i;
    out.r1.resize(n + 1);
    out.r2.resize(n + 1);
    out.r4.resize(n + 1);
    out.r5.resize(n + 1);
    out.r3.assign(N, std::vector<double>(n + 1, 0.0));
    out.r6.assign(N, std::vector<double>(n + 1, 0.0));
    const double two_k = 2.0 * p.k[i];
    for (int k = 0; k <= n; ++k) {
        const BrokerBlock b = coeffs.broker(k, i);
        out.r1[k] = b.x(i) / two_k - informed.omega0[i][k];
        out.r2[k] = (p.b[i] + 2.0 * b.n(i, i)) / two_k;
        out.r4[k] = b.d(i) / two_k - informed.omega1[i][k];
        out.r5[k] = b.y(i, i) / two_k - 1.0;
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            out.r3[j][k] = b.Nsym(j, i) / two_k;
            out.r6[j][k] = b.y(i, j) / two_k;
        }
    }
    return out;
}

// nu~^i reconstructed from the r-coefficients at node k.
inline double net_speed_from_coefficients(const NetSpeedCoefficients& net, int k,
                                          const FeedbackState& st) {
    const int i = net.broker;
    double v = net.r1[k] * st.alpha + net.r2[k] * st.q[i] + net.r4[k] * st.qI +
               net.r5[k] * st.u[i];
    for (std::size_t j = 0; j < net.r3.size(); ++j) {
        if (static_cast<int>(j) == i) continue;
        v += net.r3[j][k] * st.q[j] + net.r6[j][k] * st.u[j];
    }
    return v;
}

}  // namespace liqgame
