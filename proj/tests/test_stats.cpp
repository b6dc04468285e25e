#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "liqgame/stats.hpp"

using namespace liqgame;

TEST_CASE("welch two sample t-test") {
    SECTION("identical samples") {
        const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
        const TTestResult r = two_sample_t(a, a);
        CHECK(r.t == 0.0);
        CHECK(r.p == 1.0);
    }
    SECTION("clearly separated samples") {
        std::vector<double> a = {0.0, 0.0, 0.0, 0.0};
        std::vector<double> b = {1.0, 1.0, 1.0, 1.0};
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> jitter(-1e-6, 1e-6);
        for (auto& v : a) v += jitter(rng);
        for (auto& v : b) v += jitter(rng);
        const TTestResult r = two_sample_t(a, b);
        CHECK(std::abs(r.t) > 1e4);
        CHECK(r.p < 1e-10);
    }
    SECTION("textbook values") {
        // Reference values computed with an independent implementation of the
        // Welch statistic and Welch-Satterthwaite degrees of freedom.
        const std::vector<double> a = {1.1, 2.3, 3.1, 4.8, 5.0};
        const std::vector<double> b = {2.0, 2.1, 4.5};
        const TTestResult r = two_sample_t(a, b);
        CHECK(r.t == Catch::Approx(0.35634426033655481).epsilon(1e-12));
        CHECK(r.p == Catch::Approx(0.73621398733832755).epsilon(1e-10));
        CHECK(r.df == Catch::Approx(4.9687905362161882).epsilon(1e-12));
        CHECK(r.mean_a == Catch::Approx(3.26).epsilon(1e-14));
        CHECK(r.mean_b == Catch::Approx(2.8666666666666667).epsilon(1e-14));
        CHECK(r.std_a == Catch::Approx(1.6592166826548).epsilon(1e-12));
        CHECK(r.std_b == Catch::Approx(1.4153915830374764).epsilon(1e-12));

        const TTestResult r2 =
            two_sample_t({0.5, 1.5, 2.5, 3.5}, {10.0, 10.5, 9.5, 10.25, 9.75});
        CHECK(r2.t == Catch::Approx(-11.953397882202054).epsilon(1e-12));
        CHECK(r2.p == Catch::Approx(0.00062552077060900647).epsilon(1e-9));
    }
    SECTION("antisymmetry") {
        std::mt19937_64 rng(2);
        std::normal_distribution<double> normal;
        std::vector<double> a(40), b(25);
        for (auto& v : a) v = normal(rng);
        for (auto& v : b) v = 0.3 + 1.7 * normal(rng);
        const TTestResult ab = two_sample_t(a, b);
        const TTestResult ba = two_sample_t(b, a);
        CHECK(ab.t == Catch::Approx(-ba.t).epsilon(1e-14));
        CHECK(ab.p == Catch::Approx(ba.p).epsilon(1e-14));
        CHECK(ab.df == Catch::Approx(ba.df).epsilon(1e-14));
    }
    SECTION("degenerate zero-variance pair") {
        const TTestResult r = two_sample_t({1.0, 1.0, 1.0}, {2.0, 2.0});
        CHECK(r.degenerate);
        CHECK(std::isinf(r.t));
        CHECK(r.t < 0.0);
        CHECK(r.p == 0.0);
    }
    SECTION("too small samples are rejected") {
        CHECK_THROWS_AS(two_sample_t({1.0}, {2.0, 3.0}), std::invalid_argument);
    }
}

TEST_CASE("scenario comparison rows") {
    const std::vector<std::string> names = {"a", "b"};
    const std::vector<std::vector<double>> s1 = {{1.0, 2.0, 3.0}, {10.0, 11.0, 12.0}};
    const std::vector<std::vector<double>> s2 = {{2.0, 3.0, 4.0}, {5.0, 6.0, 7.0}};
    const ScenarioComparison cmp = compare_samples(names, s1, s2);
    REQUIRE(cmp.rows.size() == 2);
    CHECK(cmp.rows[0].name == "a");
    CHECK(cmp.rows[0].pct_change == Catch::Approx(0.5).epsilon(1e-14));   // 2 -> 3
    CHECK(cmp.rows[1].pct_change == Catch::Approx(-5.0 / 11.0).epsilon(1e-14));
    const ScenarioComparison self = compare_samples(names, s1, s1);
    CHECK(self.rows[0].test.t == 0.0);
    CHECK(self.rows[1].test.t == 0.0);

    SECTION("mismatched characteristics rejected") {
        CHECK_THROWS_AS(compare_samples({"a"}, s1, s2), std::invalid_argument);
    }
}
