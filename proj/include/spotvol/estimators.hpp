#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spotvol/kernels.hpp"
#include "spotvol/model.hpp"

namespace spotvol {

// Guard constants for the debias denominators (the recursion is skipped and
// the previous stage returned when the denominator is this close to zero).
inline constexpr double kGuardRel = 1e-10;
inline constexpr double kGuardAbs = 1e-14;

// Bandwidth multiplier rule: m = dt^{-exponent} or a fixed value.
struct BandwidthRule {
    enum class Kind { Power, Const } kind = Kind::Power;
    double exponent = 0.5;
    double value = 0.0;

    double multiplier(double dt) const;
    static BandwidthRule power(double exponent) { return {Kind::Power, exponent, 0.0}; }
    static BandwidthRule constant(double m) { return {Kind::Const, 0.0, m}; }
};

// Truncation threshold rule: v = sqrt(BV) dt^alpha or v = sqrt(BV) v0.
struct ThresholdRule {
    enum class Kind { BvPower, BvScale } kind = Kind::BvPower;
    double alpha = 5.0 / 12.0;  // BvPower
    double v0 = 0.0;            // BvScale

    static ThresholdRule bv_power(double alpha) { return {Kind::BvPower, alpha, 0.0}; }
    static ThresholdRule bv_scale(double v0) { return {Kind::BvScale, 0.0, v0}; }
};

// Tuning of the characteristic-function competitor estimators:
// h = dt^{h_exponent}, u = dt^{u_exponent} / sqrt(BV).
struct CfTuning {
    double h_exponent = 0.51;
    double u_exponent = 0.0025;
    double lambda = 1.9;  // frequency ratio, > 1
    double p = 0.25;      // aggregation frequency scaler, in (0, 1)
};

// Full tuning of one estimator family on a path.
struct EstimatorConfig {
    Kernel kernel = Kernel::exponential();
    BandwidthRule m_rule;
    ThresholdRule v_rule;
    std::vector<double> zeta;       // debias levels, each > 1
    std::vector<double> p_scalers;  // auxiliary threshold scalers, each in (0, 1]
    CfTuning cf;
    bool clamp_negative = false;    // opt-in post-processing of final estimates

    void validate() const;  // throws std::invalid_argument
};

struct SpotDiagnostics {
    double last_numerator = 0.0;    // numerator of the last debias step
    double last_denominator = 0.0;  // denominator of the last debias step
    long truncation_count = 0;      // increments discarded at the base threshold
    bool guard_fired = false;
    bool clamp_a_fired = false;     // practical: A^(k) clamped at 0
    bool clamp_corr_fired = false;  // practical: correction clamped at 0
    bool negative_value = false;
    bool clamped_to_zero = false;
    std::vector<double> base_thresholds;  // distinct stage-0 thresholds evaluated
};

struct SpotEstimate {
    double tau = 0.0;
    double value = 0.0;
    int stage = 0;  // debias depth: 0, 1 or 2
    SpotDiagnostics diag;
};

// (pi/2) sum |dX_i||dX_{i-1}| / T  -- jump-robust integrated variance.
double bipower_variation(const PathSample& path);

// Threshold from the rule; returns +inf when bv == 0 (degenerate path, no
// truncation).
double threshold_v(double bv, double dt, const ThresholdRule& rule);

// Per-path engine for the truncated kernel estimator. Holds the sorted
// increments and per-tau kernel prefix sums, so repeated threshold queries at
// the same tau cost O(log n). One workspace serves every tuning that shares
// (kernel, bandwidth multiplier). Not thread-safe; use one per thread.
class SpotVolWorkspace {
public:
    SpotVolWorkspace(const PathSample& path, Kernel kernel, double m_multiplier);

    double bandwidth() const { return bandwidth_; }
    double m_multiplier() const { return m_; }
    double dt() const { return dt_; }
    double horizon() const { return horizon_; }
    long n_increments() const { return static_cast<long>(dx_.size()); }

    // Aggregation grid {i m dt : i = 1..floor(T/(m dt))} for the practical
    // corrections.
    const std::vector<double>& aggregation_taus() const { return agg_taus_; }

    // Stage-0 truncated estimate (value only).
    double stage0_value(double tau, double v, long* kept = nullptr);
    // Kernel denominator sum at tau (before the dt factor).
    double denominator_sum(double tau);

private:
    struct TauContext {
        double denom_sum = 0.0;        // sum_j K_b(t_{j-1} - tau)
        std::vector<double> prefix;    // prefix sums of K * dX^2, |dX|-ascending
    };
    TauContext& context(double tau);

    Kernel kernel_;
    double m_ = 0.0;
    double bandwidth_ = 0.0;
    double dt_ = 0.0;
    double horizon_ = 0.0;
    std::vector<double> t_left_;      // t_{i-1}, i = 1..n
    std::vector<double> dx_;          // increments
    std::vector<std::uint32_t> order_;  // increment indices, |dX| ascending
    std::vector<double> sorted_abs_;    // |dX| in ascending order
    std::vector<double> agg_taus_;
    std::map<double, TauContext> cache_;
};

// Eq.-style stage-0 estimator: kernel-weighted truncated squared increments
// normalized by dt * (kernel sum). Throws std::runtime_error when the kernel
// denominator vanishes (possible only for compact kernels with pathological
// bandwidth).
SpotEstimate spot_vol_truncated(const PathSample& path, double tau, double m,
                                double v, const Kernel& kernel);

// One debias step: c_v - (c_zv - c_v)^2 / (c_z2v - 2 c_zv + c_v), guarded
// against a vanishing denominator (returns c_v unchanged).
double debias_step(double c_v, double c_zv, double c_z2v);

// Recursion of debias steps with thresholds (v, zeta_k v, zeta_k^2 v) per
// stage; stage 0 is spot_vol_truncated.
SpotEstimate spot_vol_debiased_theoretical(const PathSample& path, double tau,
                                           const EstimatorConfig& config, int stage);

// Practical variant with the time-aggregated sign-constrained correction
// A_n^(k); stage-1 takes +ratio, stage-2 takes -ratio, both clamped at zero
// together with the correction itself.
SpotEstimate spot_vol_debiased_practical(const PathSample& path, double tau,
                                         const EstimatorConfig& config, int stage);

// Workspace-backed evaluator shared by the harness (avoids re-sorting the
// path per tau). `v` is the base threshold.
SpotEstimate eval_theoretical(SpotVolWorkspace& ws, double tau, double v,
                              std::span<const double> zeta, int stage);

class PracticalDebiaser {
public:
    PracticalDebiaser(SpotVolWorkspace& ws, std::vector<double> zeta,
                      std::vector<double> p_scalers);
    SpotEstimate evaluate(double tau, double v, int stage);

private:
    double value(double tau, double w, int stage, SpotDiagnostics& diag);
    double a_coeff(int stage, double v, SpotDiagnostics& diag);

    SpotVolWorkspace& ws_;
    std::vector<double> zeta_;
    std::vector<double> p_;
    std::map<std::pair<int, double>, double> a_cache_;
};

// --- characteristic-function competitors ---------------------------------

// S_{tau,n}(u, h) = dt * sum_i K_h(i dt - tau) cos(u dX_i / sqrt(dt)).
double cf_smoothed_cosine(const PathSample& path, double tau, double u, double h,
                          const Kernel& kernel);

// sigma_hat^2: floors S at sqrt(dt/h), applies the log transform and the
// sinh^2 bias correction.
double cf_spot_vol(const PathSample& path, double tau, double u, double h,
                   const Kernel& kernel);

// Per-path engine with a (tau, u) cache.
class CfWorkspace {
public:
    CfWorkspace(const PathSample& path, Kernel kernel, double h);

    double h() const { return h_; }
    double smoothed_cosine(double tau, double u);
    double spot_vol(double tau, double u);

    // sigma_tilde^2 = sigma_hat^2 - B~ with the aggregated correction on the
    // grid {i m dt}; the clamp (sigma_hat^2(lambda u) - sigma_hat^2(u)) ^ 0 and
    // the denominator guard follow the cited construction.
    double debiased(double tau, double u, double lambda, double p,
                    double m_multiplier, SpotDiagnostics* diag = nullptr);

private:
    const PathSample& path_;
    Kernel kernel_;
    double h_ = 0.0;
    double dt_ = 0.0;
    std::map<std::pair<double, double>, double> spot_cache_;
};

// Convenience wrapper: builds the workspace, computes u and h from the rules
// in `config` and the path's bipower variation.
double cf_spot_vol_debiased(const PathSample& path, double tau,
                            const EstimatorConfig& config);

}  // namespace spotvol
