#pragma once

#include <span>
#include <utility>
#include <vector>

#include "spotvol/estimators.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/rng.hpp"

namespace spotvol {

// Local jump-activity parameters entering the truncated-moment expansions.
struct JumpActivityParams {
    double y = 1.5;        // activity index, in (0, 2) \ {1}
    double c_plus = 0.0;   // Levy density constants
    double c_minus = 0.0;
    double chi = 0.0;      // jump volatility multiplier |chi|
    double sigma2 = 0.0;   // spot variance

    void validate() const;  // throws std::invalid_argument
};

// Levy density constant of a symmetric strictly y-stable process with scale c
// (characteristic function exp(-c^y |u|^y)): each side has density
// C |x|^{-1-y} with C = c^y y(1-y) / (2 Gamma(2-y) cos(pi y / 2)), y != 1.
double stable_scale_to_levy_constant(double scale, double y);
// Inverse mapping, one side (assumes the symmetric case C+ = C-).
double levy_constant_to_stable_scale(double c_side, double y);

// C_{p} = (C+ + C-) |chi|^y / (2p - y). Requires 2p > y.
double c_coeff(int p, const JumpActivityParams& params);

// D_1 = (C+ + C-) (y+1)(y+2) / (2y) * sigma^2 |chi|^y.
double d_coeff(const JumpActivityParams& params);

// Leading terms of E[(dX)^{2p} 1{|dX| <= v}]: for p = 1,
// sigma^2 dt + C_1 dt v^{2-y} + D_1 dt^2 v^{-y}; for p >= 2,
// (2p-1)!! sigma^{2p} dt^p + C_p dt v^{2p-y}. Requires v > sqrt(dt).
double truncated_moment_expansion(int p, const JumpActivityParams& params,
                                  double dt, double v);

// Difference form E[(dX)^2 1{v < |dX| <= zeta v}] =
// C_1 dt (zeta^{2-y} - 1) v^{2-y} + D_1 dt^2 (zeta^{-y} - 1) v^{-y}.
double truncated_moment_difference(const JumpActivityParams& params, double dt,
                                   double v, double zeta);

struct OracleResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_draws = 0;
};

// Brute-force Monte Carlo check of the expansions: draws
// dX = sigma sqrt(dt) Z + chi dJ with dJ a symmetric stable increment whose
// scale is recovered from the params' Levy constants, and averages
// (dX)^{2p} 1{|dX| <= v}. Needs C+ = C- (symmetric sampler) and >= 1e4 draws.
OracleResult mc_truncated_moment_oracle(int p, const JumpActivityParams& params,
                                        double dt, double v, std::size_t n_draws,
                                        RngStream& stream);

// Same MC, for the difference form 1{v < |dX| <= zeta v}.
OracleResult mc_truncated_moment_difference_oracle(const JumpActivityParams& params,
                                                   double dt, double v, double zeta,
                                                   std::size_t n_draws,
                                                   RngStream& stream);

// Kernel-weighted bias term A(v, m): the two expansion terms averaged with
// weights K_{m dt}(t_{i-1} - tau) and normalized by the same denominator as
// the spot estimator. `params_at_grid[i]` describes grid point i (one entry
// per increment, t_{i-1} = i * dt).
double bias_A(double v, double m, const Kernel& kernel,
              std::span<const JumpActivityParams> params_at_grid, double tau,
              double dt);

// u = dt^{-1/2} v^{2 - y/2}, the rate normalizing the threshold-difference CLT.
double u_rate(double dt, double v, double y);

// Limit variance of the normalized difference:
// (C+ + C-) |chi|^y / (4-y) * (zeta^{4-y} - 1) * int K^2.
double difference_clt_variance(double zeta, const JumpActivityParams& params,
                               const Kernel& kernel);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double half_width = 0.0;
};

// Plug-in interval estimate +- z sqrt(2 estimate^2 int K^2 / m); valid in the
// m sqrt(dt) -> 0 regime where the vol-of-vol term drops from the limit.
ConfidenceInterval feasible_ci(const SpotEstimate& estimate, double m,
                               const Kernel& kernel, double level);

// Two-sided standard normal quantile (level in (0, 1)), |error| < 1e-13.
double normal_quantile(double p);

}  // namespace spotvol
