#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace liqgame {

// Parameter set violates a model constraint. Collects every violation so
// callers can report them all at once.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::ostringstream oss;
        oss << "invalid parameters:";
        for (const auto& s : issues) oss << "\n  - " << s;
        return oss.str();
    }
    std::vector<std::string> issues_;
};

// Non-finite values or blow-up during a numerical sweep.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Uniform grid t_k = k*T/n_steps, k = 0..n_steps.
struct TimeGrid {
    double horizon = 1.0;
    int n_steps = 5000;

    double dt() const { return horizon / n_steps; }
    double node(int k) const { return horizon * k / n_steps; }
    int size() const { return n_steps + 1; }
};

// All model constants for N brokers plus the informed trader. Per-broker
// arrays are 0-based; broker j in error messages and CSV headers is 1-based.
struct MarketParams {
    double horizon = 1.0;       // T
    int n_steps = 5000;

    double s0 = 100.0;          // initial mid-price
    double alpha0 = 0.0;        // initial signal
    double sigma = 1.0;         // mid-price volatility
    double theta = 1.0;         // signal mean-reversion rate
    double eta = 1.0;           // signal volatility

    int n_brokers = 2;
    std::vector<double> b;      // permanent impact
    std::vector<double> k;      // temporary lit-market impact
    std::vector<double> kappa;  // liquidity price charged to the informed
    std::vector<double> c;      // liquidity price charged to the uninformed
    std::vector<double> a;      // terminal inventory penalty
    std::vector<double> phi;    // running inventory penalty
    std::vector<double> theta_u;  // uninformed flow mean-reversion
    std::vector<double> eta_u;    // uninformed flow volatility
    std::vector<double> u0;       // initial uninformed speeds
    std::vector<double> q0;       // initial broker inventories
    std::vector<double> x0;       // initial broker cash
    std::vector<double> rho;      // N x N correlation of uninformed shocks, row-major

    double a_informed = 1.0;    // a_I
    double phi_informed = 0.01; // phi_I
    double psi_informed = 0.01; // psi_I ambiguity aversion
    double qI0 = 0.0;           // informed initial inventory
    double xI0 = 0.0;           // informed initial cash

    double rho_at(int i, int j) const { return rho[static_cast<std::size_t>(i) * n_brokers + j]; }
    TimeGrid grid() const { return TimeGrid{horizon, n_steps}; }
};

// kappa = (sum_j 1/kappa_j)^-1. Permutation invariant, homogeneous of
// degree 1, and bounded above by min_j kappa_j.
inline double harmonic_kappa(const std::vector<double>& kappa) {
    double inv = 0.0;
    for (double kj : kappa) inv += 1.0 / kj;
    return 1.0 / inv;
}

// Lower-triangular L with L*L^T = rho for a symmetric PSD matrix with unit
// diagonal. Semi-definite inputs are handled by clamping pivots in
// [-psd_tol, psd_tol] to zero (the perfectly correlated case is exactly
// rank-deficient). Throws NumericalError naming the offending leading minor
// when the matrix is not PSD within tolerance.
inline std::vector<double> correlation_root(const std::vector<double>& rho, int n,
                                            double psd_tol = 1e-10) {
    std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [n](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i) * n + j];
    };
    for (int j = 0; j < n; ++j) {
        double diag = rho[static_cast<std::size_t>(j) * n + j];
        for (int t = 0; t < j; ++t) diag -= at(L, j, t) * at(L, j, t);
        if (diag < -psd_tol) {
            std::ostringstream oss;
            oss << "rho is not positive semi-definite: leading minor of order " << (j + 1)
                << " has pivot " << diag;
            throw NumericalError(oss.str());
        }
        const double ljj = diag > psd_tol ? std::sqrt(diag) : 0.0;
        at(L, j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = rho[static_cast<std::size_t>(i) * n + j];
            for (int t = 0; t < j; ++t) s -= at(L, i, t) * at(L, j, t);
            if (ljj > 0.0) {
                at(L, i, j) = s / ljj;
            } else if (std::abs(s) > 1e-8) {
                std::ostringstream oss;
                oss << "rho is not positive semi-definite: zero pivot in column " << (j + 1)
                    << " with nonzero off-diagonal residual " << s;
                throw NumericalError(oss.str());
            }
        }
    }
    return L;
}

namespace detail {

inline void check_positive(std::vector<std::string>& out, double v, const std::string& name) {
    if (!(v > 0.0)) out.push_back(name + " must be > 0");
}

inline void check_nonnegative(std::vector<std::string>& out, double v, const std::string& name) {
    if (!(v >= 0.0)) out.push_back(name + " must be >= 0");
}

inline void check_size(std::vector<std::string>& out, std::size_t got, std::size_t want,
                       const std::string& name) {
    if (got != want) {
        std::ostringstream oss;
        oss << name << " must have " << want << " entries, got " << got;
        out.push_back(oss.str());
    }
}

}  // namespace detail

// All invariant violations of a parameter set, by field name; empty when the
// set is valid.
inline std::vector<std::string> validation_issues(const MarketParams& p) {
    using detail::check_nonnegative;
    using detail::check_positive;
    using detail::check_size;

    std::vector<std::string> out;
    const int n = p.n_brokers;
    if (n < 1) out.push_back("n_brokers must be >= 1");
    if (p.n_steps < 1) out.push_back("n_steps must be >= 1");
    check_positive(out, p.horizon, "T");
    check_positive(out, p.sigma, "sigma");
    check_positive(out, p.theta, "theta");
    check_positive(out, p.eta, "eta");
    check_nonnegative(out, p.a_informed, "a_I");
    check_nonnegative(out, p.phi_informed, "phi_I");
    check_nonnegative(out, p.psi_informed, "psi_I");
    if (n < 1) return out;

    const std::size_t un = static_cast<std::size_t>(n);
    std::vector<std::string> size_issues;
    check_size(size_issues, p.b.size(), un, "b");
    check_size(size_issues, p.k.size(), un, "k");
    check_size(size_issues, p.kappa.size(), un, "kappa");
    check_size(size_issues, p.c.size(), un, "c");
    check_size(size_issues, p.a.size(), un, "a");
    check_size(size_issues, p.phi.size(), un, "phi");
    check_size(size_issues, p.theta_u.size(), un, "theta_j");
    check_size(size_issues, p.eta_u.size(), un, "eta_j");
    check_size(size_issues, p.u0.size(), un, "u0");
    check_size(size_issues, p.q0.size(), un, "q0");
    check_size(size_issues, p.x0.size(), un, "x0");
    check_size(size_issues, p.rho.size(), un * un, "rho");
    if (!size_issues.empty()) {
        out.insert(out.end(), size_issues.begin(), size_issues.end());
        return out;
    }

    auto idx = [](const char* base, int j) {
        std::ostringstream oss;
        oss << base << "_" << (j + 1);
        return oss.str();
    };
    for (int j = 0; j < n; ++j) {
        check_positive(out, p.b[j], idx("b", j));
        check_positive(out, p.k[j], idx("k", j));
        check_positive(out, p.kappa[j], idx("kappa", j));
        check_positive(out, p.c[j], idx("c", j));
        check_nonnegative(out, p.a[j], idx("a", j));
        check_nonnegative(out, p.phi[j], idx("phi", j));
        check_positive(out, p.theta_u[j], idx("theta", j));
        check_positive(out, p.eta_u[j], idx("eta", j));
    }

    for (int i = 0; i < n; ++i) {
        if (std::abs(p.rho_at(i, i) - 1.0) > 1e-12) {
            std::ostringstream oss;
            oss << "rho_" << (i + 1) << "," << (i + 1) << " must be 1";
            out.push_back(oss.str());
        }
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(p.rho_at(i, j) - p.rho_at(j, i)) > 1e-12) {
                std::ostringstream oss;
                oss << "rho must be symmetric (entries " << (i + 1) << "," << (j + 1) << ")";
                out.push_back(oss.str());
            }
        }
    }
    if (out.empty()) {
        try {
            correlation_root(p.rho, n);
        } catch (const NumericalError& e) {
            out.push_back(e.what());
        }
    }

    // zeta in the informed trader's closed forms divides by a_I - sqrt(kappa*Phi).
    bool kappas_ok = std::all_of(p.kappa.begin(), p.kappa.end(), [](double v) { return v > 0.0; });
    if (kappas_ok) {
        const double kh = harmonic_kappa(p.kappa);
        const double Phi = 0.5 * p.psi_informed * p.sigma * p.sigma + p.phi_informed;
        const double s = std::sqrt(kh * Phi);
        if (std::abs(p.a_informed - s) <= 1e-14 * std::max(1.0, p.a_informed + s)) {
            out.push_back("zeta singular: a_I equals sqrt(kappa*Phi)");
        }
    }
    return out;
}

// Returns the parameter set unchanged when every invariant holds; throws
// ValidationError listing each violation otherwise. Idempotent.
inline MarketParams validate(const MarketParams& p) {
    auto issues = validation_issues(p);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return p;
}

}  // namespace liqgame
