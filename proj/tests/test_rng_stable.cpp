#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "spotvol/rng.hpp"
#include "spotvol/stable.hpp"
#include "test_util.hpp"

using namespace spotvol;

TEST_CASE("streams are deterministic and index-separated") {
    RngStream a = RngStream::substream(42, 7);
    RngStream b = RngStream::substream(42, 7);
    RngStream c = RngStream::substream(42, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const double x = a.uniform_open();
        all_equal = all_equal && (x == b.uniform_open());
        any_diff = any_diff || (x != c.uniform_open());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform draws stay inside the open interval") {
    RngStream s(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform_open();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    RngStream s(5);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("stable increments: degenerate scale gives exact zeros") {
    RngStream s(3);
    const auto xs = stable_increments(1.5, 0.0, 0.1, 1000, s);
    for (double x : xs) CHECK(x == 0.0);
}

TEST_CASE("stable increments: domain errors") {
    RngStream s(3);
    CHECK_THROWS_AS(stable_increments(2.0, 1.0, 1.0, 1, s), std::domain_error);
    CHECK_THROWS_AS(stable_increments(0.0, 1.0, 1.0, 1, s), std::domain_error);
    CHECK_THROWS_AS(stable_increments(1.5, 1.0, 0.0, 1, s), std::domain_error);
    CHECK_THROWS_AS(stable_increments(1.5, -1.0, 1.0, 1, s), std::domain_error);
}

TEST_CASE("stable increments: sample median is consistent with symmetry") {
    RngStream s(11);
    auto xs = stable_increments(1.5, 1.0, 1.0, 100000, s);
    std::sort(xs.begin(), xs.end());
    const double median = xs[xs.size() / 2];
    // se of the sample median is 1/(2 f(0) sqrt(n)); f(0) = Gamma(1/alpha)/(pi alpha)
    const double f0 = std::tgamma(1.0 / 1.5) / (std::numbers::pi * 1.5);
    const double se = 1.0 / (2.0 * f0 * std::sqrt(100000.0));
    CHECK(std::abs(median) < 3.0 * se);
}

TEST_CASE("stable draws match the Fourier-inverted CDF (KS <= 0.01)") {
    RngStream s(17);
    const auto xs = stable_increments(1.5, 1.0, 1.0, 100000, s);
    const double d = testutil::ks_distance(
        xs, [](double x) { return testoracle::stable_cdf(x, 1.5); });
    CHECK(d <= 0.01);
}

TEST_CASE("self-similarity: dt^{1/y} scaling matches in distribution") {
    const double y = 1.3, dt = 0.01;
    RngStream s1(23), s2(29);
    auto a = stable_increments(y, 1.0, dt, 100000, s1);
    auto b = stable_increments(y, 1.0, 1.0, 100000, s2);
    const double amp = std::pow(dt, 1.0 / y);
    for (double& x : b) x *= amp;
    const double d = testutil::ks_two_sample(a, b);
    const double crit =
        testutil::ks_critical(0.01) * std::sqrt((100000.0 + 100000.0) / (100000.0 * 100000.0));
    CHECK(d <= crit);
}

TEST_CASE("cauchy case y = 1 uses the tan limit") {
    RngStream s(31);
    auto xs = stable_increments(1.0, 1.0, 1.0, 100000, s);
    // standard Cauchy quartiles at +-1
    const double q25 = [&xs]() {
        std::sort(xs.begin(), xs.end());
        return xs[xs.size() / 4];
    }();
    CHECK(std::abs(q25 + 1.0) < 0.05);
}
