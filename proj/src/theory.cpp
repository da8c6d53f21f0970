#include "spotvol/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spotvol/stable.hpp"

namespace spotvol {

void JumpActivityParams::validate() const {
    if (!(y > 0.0 && y < 2.0) || y == 1.0)
        throw std::invalid_argument("activity index y must lie in (0,2) \\ {1}");
    if (!(c_plus > 0.0) || !(c_minus > 0.0))
        throw std::invalid_argument("Levy constants must be positive");
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
}

double stable_scale_to_levy_constant(double scale, double y) {
    if (!(y > 0.0 && y < 2.0) || y == 1.0)
        throw std::domain_error("stable/Levy mapping needs y in (0,2) \\ {1}");
    if (!(scale >= 0.0)) throw std::domain_error("scale must be >= 0");
    // exp(-c^y |u|^y) corresponds to side density C |x|^{-1-y} with
    // C = c^y y (1-y) / (2 Gamma(2-y) cos(pi y / 2)); both factors flip sign
    // across y = 1, so C > 0 on the whole range.
    return std::pow(scale, y) * y * (1.0 - y) /
           (2.0 * std::tgamma(2.0 - y) * std::cos(std::numbers::pi * y / 2.0));
}

double levy_constant_to_stable_scale(double c_side, double y) {
    if (!(c_side > 0.0)) throw std::domain_error("Levy constant must be positive");
    const double unit = stable_scale_to_levy_constant(1.0, y);
    return std::pow(c_side / unit, 1.0 / y);
}

double c_coeff(int p, const JumpActivityParams& params) {
    params.validate();
    if (p < 1) throw std::domain_error("c_coeff: p must be a positive integer");
    if (!(2.0 * p > params.y)) throw std::domain_error("c_coeff: need 2p > y");
    return (params.c_plus + params.c_minus) * std::pow(std::abs(params.chi), params.y) /
           (2.0 * p - params.y);
}

double d_coeff(const JumpActivityParams& params) {
    params.validate();
    const double y = params.y;
    return (params.c_plus + params.c_minus) * (y + 1.0) * (y + 2.0) / (2.0 * y) *
           params.sigma2 * std::pow(std::abs(params.chi), y);
}

namespace {
double double_factorial_odd(int p) {
    // (2p - 1)!!
    double r = 1.0;
    for (int k = 2 * p - 1; k > 1; k -= 2) r *= k;
    return r;
}
}  // namespace

double truncated_moment_expansion(int p, const JumpActivityParams& params,
                                  double dt, double v) {
    params.validate();
    if (p < 1) throw std::domain_error("expansion: p must be a positive integer");
    if (!(dt > 0.0)) throw std::domain_error("expansion: dt must be positive");
    if (!(v > std::sqrt(dt)))
        throw std::invalid_argument("expansion requires v > sqrt(dt)");
    const double sigma2 = params.sigma2;
    if (p == 1)
        return sigma2 * dt + c_coeff(1, params) * dt * std::pow(v, 2.0 - params.y) +
               d_coeff(params) * dt * dt * std::pow(v, -params.y);
    return double_factorial_odd(p) * std::pow(sigma2, p) * std::pow(dt, p) +
           c_coeff(p, params) * dt * std::pow(v, 2.0 * p - params.y);
}

double truncated_moment_difference(const JumpActivityParams& params, double dt,
                                   double v, double zeta) {
    params.validate();
    if (!(zeta > 1.0)) throw std::domain_error("difference expansion needs zeta > 1");
    const double y = params.y;
    return c_coeff(1, params) * dt * (std::pow(zeta, 2.0 - y) - 1.0) * std::pow(v, 2.0 - y) +
           d_coeff(params) * dt * dt * (std::pow(zeta, -y) - 1.0) * std::pow(v, -y);
}

namespace {

OracleResult mc_moment(int p, const JumpActivityParams& params, double dt,
                       double v_lo, double v_hi, std::size_t n_draws,
                       RngStream& stream) {
    params.validate();
    if (n_draws < 10000)
        throw std::invalid_argument("oracle needs >= 1e4 draws");
    if (std::abs(params.c_plus - params.c_minus) >
        1e-12 * std::max(params.c_plus, params.c_minus))
        throw std::invalid_argument("oracle simulates symmetric jumps; need C+ = C-");
    const double scale = levy_constant_to_stable_scale(params.c_plus, params.y);
    const double sigma = std::sqrt(params.sigma2);
    const double sqrt_dt = std::sqrt(dt);
    const double amp = std::pow(dt, 1.0 / params.y) * scale;
    const double chi = std::abs(params.chi);

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        double dx = sigma * sqrt_dt * stream.normal();
        if (chi > 0.0) dx += chi * amp * stream.stable_standard(params.y);
        const double a = std::abs(dx);
        double val = 0.0;
        if (a > v_lo && a <= v_hi) val = std::pow(dx * dx, p);
        sum += val;
        sum_sq += val * val;
    }
    const double n = static_cast<double>(n_draws);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return OracleResult{mean, std::sqrt(var / n), n_draws};
}

}  // namespace

OracleResult mc_truncated_moment_oracle(int p, const JumpActivityParams& params,
                                        double dt, double v, std::size_t n_draws,
                                        RngStream& stream) {
    return mc_moment(p, params, dt, -1.0, v, n_draws, stream);
}

OracleResult mc_truncated_moment_difference_oracle(const JumpActivityParams& params,
                                                   double dt, double v, double zeta,
                                                   std::size_t n_draws,
                                                   RngStream& stream) {
    if (!(zeta > 1.0)) throw std::domain_error("difference oracle needs zeta > 1");
    return mc_moment(1, params, dt, v, zeta * v, n_draws, stream);
}

double bias_A(double v, double m, const Kernel& kernel,
              std::span<const JumpActivityParams> params_at_grid, double tau,
              double dt) {
    if (params_at_grid.empty()) throw std::invalid_argument("bias_A: empty grid");
    if (!(v > 0.0) || !(dt > 0.0)) throw std::invalid_argument("bias_A: bad v or dt");
    const double b = m * dt;
    double denom = 0.0, num1 = 0.0, num2 = 0.0;
    for (std::size_t i = 0; i < params_at_grid.size(); ++i) {
        const double t_left = static_cast<double>(i) * dt;
        const double w = eval_scaled(kernel, b, t_left - tau);
        if (w == 0.0) continue;
        const auto& pr = params_at_grid[i];
        const double c1 = pr.chi == 0.0 ? 0.0 : c_coeff(1, pr);
        const double d1 = pr.chi == 0.0 ? 0.0 : d_coeff(pr);
        denom += w;
        num1 += w * c1 * dt * std::pow(v, 2.0 - pr.y);
        num2 += w * d1 * dt * dt * std::pow(v, -pr.y);
    }
    if (denom <= 0.0) throw std::runtime_error("bias_A: kernel denominator is zero");
    return (num1 + num2) / (dt * denom);
}

double u_rate(double dt, double v, double y) {
    if (!(dt > 0.0) || !(v > 0.0)) throw std::domain_error("u_rate: dt and v must be positive");
    return std::pow(dt, -0.5) * std::pow(v, 2.0 - y / 2.0);
}

double difference_clt_variance(double zeta, const JumpActivityParams& params,
                               const Kernel& kernel) {
    params.validate();
    if (!(zeta > 1.0)) throw std::domain_error("difference_clt_variance needs zeta > 1");
    const double y = params.y;
    return (params.c_plus + params.c_minus) * std::pow(std::abs(params.chi), y) /
           (4.0 - y) * (std::pow(zeta, 4.0 - y) - 1.0) * k_squared_integral(kernel);
}

ConfidenceInterval feasible_ci(const SpotEstimate& estimate, double m,
                               const Kernel& kernel, double level) {
    if (!(estimate.value >= 0.0))
        throw std::invalid_argument("feasible_ci needs a nonnegative estimate");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("coverage level must lie in (0, 1)");
    if (!(m > 0.0)) throw std::invalid_argument("bandwidth multiplier must be positive");
    const double z = normal_quantile(0.5 + level / 2.0);
    const double half =
        z * std::sqrt(2.0 * estimate.value * estimate.value * k_squared_integral(kernel) / m);
    return ConfidenceInterval{estimate.value - half, estimate.value + half, half};
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p in (0,1)");
    // Acklam's rational approximation, then one Halley refinement against the
    // exact erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425, p_high = 1.0 - p_low;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= p_high) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
        const double u = e * std::numbers::sqrt2 * std::sqrt(std::numbers::pi) *
                         std::exp(x * x / 2.0);
        x = x - u / (1.0 + x * u / 2.0);
    }
    return x;
}

}  // namespace spotvol
