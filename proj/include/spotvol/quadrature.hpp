#pragma once

#include <functional>
#include <vector>

namespace spotvol {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
    bool converged = false;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b]. Either
// endpoint may be infinite; semi-infinite and doubly infinite ranges are
// mapped to finite intervals before subdivision. `split_points` lists known
// breakpoints of the integrand (kernel support edges, interpolation nodes);
// the initial partition is cut there so discontinuities never sit inside a
// panel.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-9,
                           const std::vector<double>& split_points = {});

// Same, but throws std::runtime_error when the error estimate does not reach
// abs_tol within the evaluation budget.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-9,
                          const std::vector<double>& split_points = {});

}  // namespace spotvol
