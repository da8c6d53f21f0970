#pragma once

// Independent numerical oracles used only by tests. These deliberately avoid
// the sampling/estimation code paths they are checking.

#include <cmath>
#include <numbers>

#include "spotvol/quadrature.hpp"

namespace testoracle {

// CDF of the standard symmetric alpha-stable law (cf exp(-|u|^alpha)).
// Fourier inversion F(x) = 1/2 + (1/pi) int_0^inf sin(ux) exp(-u^alpha)/u du
// for moderate x; Bergstrom tail series beyond (the oscillatory integral is
// impractical there and the series error is far below the KS tolerance).
inline double stable_cdf(double x, double alpha) {
    if (x == 0.0) return 0.5;
    if (x < 0.0) return 1.0 - stable_cdf(-x, alpha);
    if (x > 20.0) {
        double tail = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const double sign = (k % 2 == 1) ? 1.0 : -1.0;
            tail += sign * std::tgamma(k * alpha + 1.0) /
                    (std::tgamma(k + 1.0) * k * alpha) *
                    std::sin(k * std::numbers::pi * alpha / 2.0) *
                    std::pow(x, -k * alpha);
        }
        return 1.0 - tail / std::numbers::pi;
    }
    const double upper = std::pow(40.0, 1.0 / alpha);  // exp(-u^alpha) < 5e-18 beyond
    const double val = spotvol::integrate_or_throw(
        [x, alpha](double u) {
            if (u < 1e-300) return x;  // sin(ux)/u -> x
            return std::sin(u * x) * std::exp(-std::pow(u, alpha)) / u;
        },
        0.0, upper, 1e-10);
    return 0.5 + val / std::numbers::pi;
}

// Gaussian truncated second moment E[Z^2 1{|Z| <= c}] for N(0,1).
inline double gaussian_kept_second_moment(double c) {
    const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
    const double tail = 0.5 * std::erfc(c / std::numbers::sqrt2);
    return 1.0 - 2.0 * (c * phi + tail);
}

}  // namespace testoracle
