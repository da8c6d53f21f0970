#include "spotvol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace spotvol {
namespace {

// Kronrod 15-point nodes/weights on [-1, 1]; odd-indexed nodes are the
// embedded Gauss-7 rule.
constexpr double kKronrodNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};

constexpr double kKronrodWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};

constexpr double kGaussWeights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double kronrod = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double x = mid + half * kKronrodNodes[i];
        const double fx = f(x);
        kronrod += kKronrodWeights[i] * fx;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fx;
    }
    kronrod *= half;
    gauss *= half;
    // Conservative error estimate: |K15 - G7| plus a rounding floor.
    const double err = std::abs(kronrod - gauss) + 1e-16 * std::abs(kronrod);
    return Panel{a, b, kronrod, err};
}

QuadratureResult integrate_finite(const std::function<double(double)>& f,
                                  const std::vector<double>& edges,
                                  double abs_tol) {
    std::priority_queue<Panel> queue;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i] == edges[i + 1]) continue;
        Panel p = evaluate_panel(f, edges[i], edges[i + 1]);
        total += p.value;
        total_err += p.error;
        queue.push(p);
    }
    const int max_panels = 4000;
    int used = static_cast<int>(queue.size());
    while (total_err > abs_tol && !queue.empty() && used < max_panels) {
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) continue;  // cannot split further
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++used;
    }
    return QuadratureResult{total, total_err, total_err <= abs_tol};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol,
                           const std::vector<double>& split_points) {
    const double inf = std::numeric_limits<double>::infinity();
    const bool lo_inf = (a == -inf);
    const bool hi_inf = (b == inf);

    std::function<double(double)> g = f;
    double ga = a, gb = b;
    std::vector<double> splits;

    if (lo_inf && hi_inf) {
        // x = t / (1 - t^2), t in (-1, 1)
        g = [f](double t) {
            const double d = 1.0 - t * t;
            const double x = t / d;
            const double jac = (1.0 + t * t) / (d * d);
            return f(x) * jac;
        };
        ga = -1.0 + 1e-14;
        gb = 1.0 - 1e-14;
        for (double s : split_points) {
            // invert x = t/(1-t^2): t = (sqrt(1+4s^2) - 1) / (2s), sign of s
            if (s == 0.0) { splits.push_back(0.0); continue; }
            const double t = (std::sqrt(1.0 + 4.0 * s * s) - 1.0) / (2.0 * s);
            splits.push_back(t);
        }
    } else if (hi_inf) {
        // x = a + t / (1 - t), t in [0, 1)
        const double base = a;
        g = [f, base](double t) {
            const double d = 1.0 - t;
            return f(base + t / d) / (d * d);
        };
        ga = 0.0;
        gb = 1.0 - 1e-14;
        for (double s : split_points)
            if (s > a) splits.push_back((s - a) / (1.0 + s - a));
    } else if (lo_inf) {
        // x = b - t / (1 - t), t in [0, 1)
        const double base = b;
        g = [f, base](double t) {
            const double d = 1.0 - t;
            return f(base - t / d) / (d * d);
        };
        ga = 0.0;
        gb = 1.0 - 1e-14;
        for (double s : split_points)
            if (s < b) splits.push_back((b - s) / (1.0 + b - s));
    } else {
        splits = split_points;
    }

    if (gb < ga) std::swap(ga, gb);
    std::vector<double> edges{ga, gb};
    for (double s : splits)
        if (s > ga && s < gb) edges.push_back(s);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    return integrate_finite(g, edges, abs_tol);
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double abs_tol,
                          const std::vector<double>& split_points) {
    QuadratureResult r = integrate(f, a, b, abs_tol, split_points);
    if (!r.converged)
        throw std::runtime_error("quadrature did not converge to requested tolerance");
    return r.value;
}

}  // namespace spotvol
