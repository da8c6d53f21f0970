#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace spotvol {

struct KernelSupport {
    bool bounded = false;
    double lo = 0.0;  // valid when bounded
    double hi = 0.0;
};

// A smoothing kernel K >= 0 with integral 1. Immutable and cheap to copy;
// safe to share across threads.
class Kernel {
public:
    const std::string& name() const { return impl_->name; }
    double operator()(double x) const { return impl_->eval(x); }
    KernelSupport support() const { return impl_->support; }
    // Breakpoints of K (support edges, interpolation nodes); used to seed
    // quadrature partitions.
    const std::vector<double>& breakpoints() const { return impl_->breakpoints; }

    // K(x) = exp(-|x|) / 2, unbounded support.
    static Kernel exponential();
    // G(x) = 1/2 on [-1, 1].
    static Kernel uniform2();
    // K3(x) = (15/16) (1 - x^2)^2 on [-1, 1].
    static Kernel quartic_k3();

    static Kernel custom(std::string name, std::function<double(double)> eval,
                         KernelSupport support, std::vector<double> breakpoints);

    // Tabulated kernel with linear interpolation between nodes; zero outside
    // [x.front(), x.back()]. Nodes must be strictly increasing.
    static Kernel from_table(std::vector<double> x, std::vector<double> k,
                             std::string name = "custom_table");

    bool operator==(const Kernel& o) const { return impl_ == o.impl_; }

private:
    struct Impl {
        std::string name;
        std::function<double(double)> eval;
        KernelSupport support;
        std::vector<double> breakpoints;
    };
    explicit Kernel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// Kernel selected by name: "exponential", "uniform2", "quartic_k3".
Kernel kernel_by_name(const std::string& name);

// Tabulated kernel from a two-column CSV (x,K(x)), header optional.
Kernel load_kernel_csv(const std::string& path);

// K_b(u) = K(u/b)/b. Throws std::domain_error when b <= 0.
double eval_scaled(const Kernel& kernel, double b, double u);

// Integral of K^2 over the real line (adaptive quadrature, 1e-9 absolute).
double k_squared_integral(const Kernel& kernel);

// L(t) = int_t^inf K 1{t>=0} - int_-inf^t K 1{t<0}.
double l_function(const Kernel& kernel, double t);

// Integral of L^2 over the real line.
double l_squared_integral(const Kernel& kernel);

struct KernelCheck {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    std::string detail;
};

struct KernelValidation {
    std::vector<KernelCheck> checks;
    bool all_passed() const;
};

// Numerical checks of the kernel conditions: unit mass, nonnegativity,
// boundedness/Lipschitz away from breakpoints, first-moment integrability,
// and quadratic tail decay (probed at |y| = 1e3 and 1e6). Failures are
// reported, never thrown.
KernelValidation validate_kernel(const Kernel& kernel);

}  // namespace spotvol
