#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace liqgame {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Unbiased (n-1) sample variance.
inline double sample_variance(const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size() - 1);
}

inline double sample_std(const std::vector<double>& v) { return std::sqrt(sample_variance(v)); }

inline double standard_error(const std::vector<double>& v) {
    return sample_std(v) / std::sqrt(static_cast<double>(v.size()));
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
    double mean_a = 0.0, mean_b = 0.0;
    double std_a = 0.0, std_b = 0.0;
    bool degenerate = false;  // both samples have zero variance
};

// Welch unequal-variance two-sample t-test with Welch-Satterthwaite degrees
// of freedom and a two-sided p-value. A zero-variance pair with unequal means
// is reported as infinite |t| with p = 0 and the degenerate flag set.
inline TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("two_sample_t requires at least 2 observations per sample");
    }
    TTestResult r;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double va = sample_variance(a);
    const double vb = sample_variance(b);
    r.std_a = std::sqrt(va);
    r.std_b = std::sqrt(vb);

    const double se2 = va / na + vb / nb;
    if (se2 <= 0.0) {
        r.degenerate = true;
        if (r.mean_a == r.mean_b) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = r.mean_a > r.mean_b ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        r.df = na + nb - 2.0;
        return r;
    }

    r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.df = se2 * se2 /
           ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    boost::math::students_t_distribution<double> student(r.df);
    r.p = 2.0 * boost::math::cdf(student, -std::abs(r.t));
    return r;
}

// One table row per characteristic: Welch test plus both moments and the
// relative change (mean_b - mean_a) / mean_a.
struct ComparisonRow {
    std::string name;
    TTestResult test;
    double pct_change = 0.0;
};

struct ScenarioComparison {
    std::vector<ComparisonRow> rows;
};

inline ScenarioComparison compare_samples(const std::vector<std::string>& names,
                                          const std::vector<std::vector<double>>& samples_a,
                                          const std::vector<std::vector<double>>& samples_b) {
    if (names.size() != samples_a.size() || names.size() != samples_b.size()) {
        throw std::invalid_argument("compare_samples: mismatched characteristics");
    }
    ScenarioComparison out;
    out.rows.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        ComparisonRow row;
        row.name = names[i];
        row.test = two_sample_t(samples_a[i], samples_b[i]);
        row.pct_change = (row.test.mean_b - row.test.mean_a) / row.test.mean_a;
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace liqgame
