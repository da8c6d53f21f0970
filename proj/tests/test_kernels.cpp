#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "spotvol/kernels.hpp"
#include "spotvol/quadrature.hpp"

using namespace spotvol;

TEST_CASE("quadrature basics") {
    // smooth finite
    CHECK(integrate_or_throw([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    // breakpoint handling
    CHECK(integrate_or_throw([](double x) { return std::abs(x) <= 1.0 ? 0.5 : 0.0; },
                             -3.0, 3.0, 1e-10, {-1.0, 1.0}) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // semi-infinite
    CHECK(integrate_or_throw([](double x) { return std::exp(-x); }, 0.0,
                             std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0).epsilon(1e-9));
    // doubly infinite (standard normal density)
    CHECK(integrate_or_throw(
              [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); },
              -std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eval_scaled direct values") {
    CHECK(eval_scaled(Kernel::exponential(), 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(eval_scaled(Kernel::uniform2(), 0.5, 0.6) == 0.0);  // outside scaled support
    CHECK(eval_scaled(Kernel::quartic_k3(), 2.0, 0.0) == doctest::Approx(15.0 / 32.0));
    CHECK_THROWS_AS(eval_scaled(Kernel::exponential(), 0.0, 0.1), std::domain_error);
}

TEST_CASE("k_squared_integral analytic values") {
    CHECK(k_squared_integral(Kernel::exponential()) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(k_squared_integral(Kernel::uniform2()) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(k_squared_integral(Kernel::quartic_k3()) ==
          doctest::Approx(5.0 / 7.0).epsilon(1e-8));
}

TEST_CASE("l_function values and symmetry") {
    const Kernel e = Kernel::exponential();
    CHECK(l_function(e, 0.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(l_function(e, 50.0) == doctest::Approx(0.0).epsilon(1e-9));
    // symmetric kernels: L(-t) = -L(t)
    for (const Kernel& k : {Kernel::exponential(), Kernel::uniform2(), Kernel::quartic_k3()})
        for (double t : {0.2, 0.5, 0.9})
            CHECK(l_function(k, -t) == doctest::Approx(-l_function(k, t)).epsilon(1e-8));
}

TEST_CASE("l_function is nonincreasing on t >= 0 and jumps by total mass at 0") {
    for (const Kernel& k : {Kernel::exponential(), Kernel::uniform2(), Kernel::quartic_k3()}) {
        double prev = l_function(k, 0.0);
        for (double t : {0.1, 0.3, 0.6, 1.0, 2.0}) {
            const double cur = l_function(k, t);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
        const double jump = l_function(k, 0.0) - l_function(k, -1e-12);
        CHECK(jump == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("l_squared_integral values") {
    CHECK(l_squared_integral(Kernel::exponential()) == doctest::Approx(0.25).epsilon(1e-7));
    // Piecewise-linear L for the two-sided uniform kernel: L(t) = (1-t)/2 on
    // [0,1], odd extension below zero, so the integral is 2 * (1/4) * (1/3).
    CHECK(l_squared_integral(Kernel::uniform2()) == doctest::Approx(1.0 / 6.0).epsilon(1e-7));
    for (const Kernel& k : {Kernel::exponential(), Kernel::uniform2(), Kernel::quartic_k3()})
        CHECK(l_squared_integral(k) > 0.0);
}

TEST_CASE("eval_scaled integrates to one for any bandwidth") {
    for (const Kernel& k : {Kernel::exponential(), Kernel::uniform2(), Kernel::quartic_k3()})
        for (double b : {0.1, 1.0, 7.5}) {
            std::vector<double> splits;
            for (double s : k.breakpoints()) splits.push_back(s * b);
            const double lo = k.support().bounded ? k.support().lo * b
                                                  : -std::numeric_limits<double>::infinity();
            const double hi = k.support().bounded ? k.support().hi * b
                                                  : std::numeric_limits<double>::infinity();
            const double mass = integrate_or_throw(
                [&k, b](double u) { return eval_scaled(k, b, u); }, lo, hi, 1e-9, splits);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("scaling identity: b * int K_b^2 = int K^2") {
    for (const Kernel& k : {Kernel::exponential(), Kernel::quartic_k3()})
        for (double b : {0.25, 2.0}) {
            const double lo = k.support().bounded ? k.support().lo * b
                                                  : -std::numeric_limits<double>::infinity();
            const double hi = k.support().bounded ? k.support().hi * b
                                                  : std::numeric_limits<double>::infinity();
            const double val = b * integrate_or_throw(
                                       [&k, b](double u) {
                                           const double w = eval_scaled(k, b, u);
                                           return w * w;
                                       },
                                       lo, hi, 1e-10);
            CHECK(val == doctest::Approx(k_squared_integral(k)).epsilon(1e-6));
        }
}

TEST_CASE("validate_kernel passes the built-ins") {
    for (const Kernel& k : {Kernel::exponential(), Kernel::uniform2(), Kernel::quartic_k3()}) {
        const KernelValidation rep = validate_kernel(k);
        CHECK(rep.all_passed());
    }
}

TEST_CASE("validate_kernel flags a half-mass kernel") {
    const Kernel bad = Kernel::custom(
        "ramp", [](double x) { return (x >= 0.0 && x <= 1.0) ? x : 0.0; },
        KernelSupport{true, 0.0, 1.0}, {0.0, 1.0});
    const KernelValidation rep = validate_kernel(bad);
    CHECK_FALSE(rep.all_passed());
    for (const auto& c : rep.checks)
        if (c.name == "unit_mass") {
            CHECK_FALSE(c.passed);
            CHECK(c.residual == doctest::Approx(0.5).epsilon(1e-6));
        }
}

TEST_CASE("validate_kernel flags a doubled Gaussian shape with residual 1") {
    const Kernel bad = Kernel::custom(
        "double_gauss",
        [](double x) { return 2.0 * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); },
        KernelSupport{false, 0.0, 0.0}, {});
    const KernelValidation rep = validate_kernel(bad);
    CHECK_FALSE(rep.all_passed());
    for (const auto& c : rep.checks)
        if (c.name == "unit_mass") CHECK(c.residual == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tabulated kernel loads and interpolates linearly") {
    const char* path = "test_kernel_table.csv";
    {
        std::ofstream out(path);
        out << "x,k\n-1,0\n0,1\n1,0\n";  // triangular kernel
    }
    const Kernel k = load_kernel_csv(path);
    CHECK(k(0.0) == doctest::Approx(1.0));
    CHECK(k(0.5) == doctest::Approx(0.5));
    CHECK(k(-0.25) == doctest::Approx(0.75));
    CHECK(k(1.5) == 0.0);
    CHECK(validate_kernel(k).all_passed());
    CHECK(k_squared_integral(k) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    std::remove(path);
}
