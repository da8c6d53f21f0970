#include "spotvol/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "spotvol/quadrature.hpp"

namespace spotvol {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Integration limits for a kernel; unbounded support maps to +-inf.
std::pair<double, double> limits(const Kernel& k) {
    const KernelSupport s = k.support();
    if (s.bounded) return {s.lo, s.hi};
    return {-kInf, kInf};
}
}  // namespace

Kernel Kernel::exponential() {
    auto impl = std::make_shared<const Impl>(Impl{
        "exponential",
        [](double x) { return 0.5 * std::exp(-std::abs(x)); },
        KernelSupport{false, 0.0, 0.0},
        {0.0}});
    return Kernel(impl);
}

Kernel Kernel::uniform2() {
    auto impl = std::make_shared<const Impl>(Impl{
        "uniform2",
        [](double x) { return std::abs(x) <= 1.0 ? 0.5 : 0.0; },
        KernelSupport{true, -1.0, 1.0},
        {-1.0, 1.0}});
    return Kernel(impl);
}

Kernel Kernel::quartic_k3() {
    auto impl = std::make_shared<const Impl>(Impl{
        "quartic_k3",
        [](double x) {
            if (std::abs(x) > 1.0) return 0.0;
            const double d = 1.0 - x * x;
            return (15.0 / 16.0) * d * d;
        },
        KernelSupport{true, -1.0, 1.0},
        {-1.0, 1.0}});
    return Kernel(impl);
}

Kernel Kernel::custom(std::string name, std::function<double(double)> eval,
                      KernelSupport support, std::vector<double> breakpoints) {
    auto impl = std::make_shared<const Impl>(
        Impl{std::move(name), std::move(eval), support, std::move(breakpoints)});
    return Kernel(impl);
}

Kernel Kernel::from_table(std::vector<double> x, std::vector<double> k,
                          std::string name) {
    if (x.size() != k.size() || x.size() < 2)
        throw std::invalid_argument("kernel table needs >= 2 matching (x, K) rows");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("kernel table abscissae must be strictly increasing");
    auto xs = std::make_shared<std::vector<double>>(std::move(x));
    auto ks = std::make_shared<std::vector<double>>(std::move(k));
    KernelSupport support{true, xs->front(), xs->back()};
    std::vector<double> breaks = *xs;
    auto eval = [xs, ks](double q) -> double {
        if (q < xs->front() || q > xs->back()) return 0.0;
        auto it = std::upper_bound(xs->begin(), xs->end(), q);
        if (it == xs->begin()) return ks->front();
        if (it == xs->end()) return ks->back();
        const std::size_t hi = static_cast<std::size_t>(it - xs->begin());
        const std::size_t lo = hi - 1;
        const double w = (q - (*xs)[lo]) / ((*xs)[hi] - (*xs)[lo]);
        return (1.0 - w) * (*ks)[lo] + w * (*ks)[hi];
    };
    return custom(std::move(name), std::move(eval), support, std::move(breaks));
}

Kernel kernel_by_name(const std::string& name) {
    if (name == "exponential") return Kernel::exponential();
    if (name == "uniform2") return Kernel::uniform2();
    if (name == "quartic_k3") return Kernel::quartic_k3();
    throw std::invalid_argument("unknown kernel: " + name +
                                " (expected exponential, uniform2 or quartic_k3)");
}

Kernel load_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel table: " + path);
    std::vector<double> xs, ks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, k;
        if (row >> x >> k) {
            xs.push_back(x);
            ks.push_back(k);
        }
        // non-numeric rows (header) are skipped
    }
    return Kernel::from_table(std::move(xs), std::move(ks), "custom:" + path);
}

double eval_scaled(const Kernel& kernel, double b, double u) {
    if (!(b > 0.0)) throw std::domain_error("eval_scaled: bandwidth must be positive");
    return kernel(u / b) / b;
}

double k_squared_integral(const Kernel& kernel) {
    auto [lo, hi] = limits(kernel);
    return integrate_or_throw([&kernel](double x) { const double k = kernel(x); return k * k; },
                              lo, hi, 1e-9, kernel.breakpoints());
}

double l_function(const Kernel& kernel, double t) {
    auto [lo, hi] = limits(kernel);
    if (t >= 0.0) {
        if (kernel.support().bounded && t >= hi) return 0.0;
        return integrate_or_throw([&kernel](double x) { return kernel(x); },
                                  std::max(t, lo), hi, 1e-10, kernel.breakpoints());
    }
    if (kernel.support().bounded && t <= lo) return 0.0;
    return -integrate_or_throw([&kernel](double x) { return kernel(x); },
                               lo, std::min(t, hi), 1e-10, kernel.breakpoints());
}

double l_squared_integral(const Kernel& kernel) {
    auto [lo, hi] = limits(kernel);
    // L vanishes outside the kernel support (mass 1 means L(t) -> 0 both ways),
    // so the integrand inherits the kernel's limits; 0 is a breakpoint of L.
    std::vector<double> breaks = kernel.breakpoints();
    breaks.push_back(0.0);
    return integrate_or_throw(
        [&kernel](double t) { const double l = l_function(kernel, t); return l * l; },
        lo, hi, 1e-9, breaks);
}

bool KernelValidation::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const KernelCheck& c) { return c.passed; });
}

KernelValidation validate_kernel(const Kernel& kernel) {
    KernelValidation report;
    auto [lo, hi] = limits(kernel);
    const auto& breaks = kernel.breakpoints();

    // Unit mass.
    {
        KernelCheck c{"unit_mass", false, 0.0, "integral of K equals 1"};
        QuadratureResult r = integrate([&kernel](double x) { return kernel(x); },
                                       lo, hi, 1e-10, breaks);
        c.residual = std::abs(r.value - 1.0);
        c.passed = r.converged && c.residual <= 1e-8;
        report.checks.push_back(c);
    }

    // Nonnegativity, boundedness and a Lipschitz probe away from breakpoints,
    // all on a scan grid over the (effective) support.
    {
        const double scan_lo = kernel.support().bounded ? lo : -40.0;
        const double scan_hi = kernel.support().bounded ? hi : 40.0;
        const int n = 20000;
        double min_val = 0.0, max_val = 0.0, max_slope = 0.0;
        const double step = (scan_hi - scan_lo) / n;
        double prev = kernel(scan_lo);
        for (int i = 1; i <= n; ++i) {
            const double x = scan_lo + i * step;
            const double v = kernel(x);
            min_val = std::min(min_val, v);
            max_val = std::max(max_val, v);
            // skip slope probes across declared breakpoints
            bool crosses = false;
            for (double bp : breaks)
                if (bp > x - step && bp < x + step) crosses = true;
            if (!crosses) max_slope = std::max(max_slope, std::abs(v - prev) / step);
            prev = v;
        }
        KernelCheck nonneg{"nonnegative", min_val >= 0.0, std::max(0.0, -min_val),
                           "K >= 0 on scan grid"};
        report.checks.push_back(nonneg);
        KernelCheck bounded{"bounded", std::isfinite(max_val), max_val,
                            "sup K on scan grid"};
        report.checks.push_back(bounded);
        KernelCheck lipschitz{"lipschitz", std::isfinite(max_slope) && max_slope < 1e6,
                              max_slope, "max |dK| / |dx| off breakpoints"};
        report.checks.push_back(lipschitz);
    }

    // First absolute moment.
    {
        KernelCheck c{"first_moment", false, 0.0, "integral of |K(x) x| is finite"};
        QuadratureResult r = integrate(
            [&kernel](double x) { return std::abs(kernel(x) * x); }, lo, hi, 1e-8, breaks);
        c.residual = r.error;
        c.passed = r.converged && std::isfinite(r.value);
        report.checks.push_back(c);
    }

    // Quadratic tail decay, probed at |y| = 1e3 and 1e6.
    {
        double worst = 0.0;
        for (double y : {1e3, 1e6, -1e3, -1e6})
            worst = std::max(worst, kernel(y) * y * y);
        KernelCheck c{"tail_decay", worst <= 1e-6, worst, "K(y) y^2 at |y| = 1e3, 1e6"};
        report.checks.push_back(c);
    }

    return report;
}

}  // namespace spotvol
