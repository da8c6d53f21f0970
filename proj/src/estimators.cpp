#include "spotvol/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace spotvol {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool guard_trips(double den, double a, double b, double c) {
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), kGuardAbs});
    return std::abs(den) < kGuardRel * scale;
}
}  // namespace

double BandwidthRule::multiplier(double dt) const {
    switch (kind) {
        case Kind::Power: return std::pow(dt, -exponent);
        case Kind::Const: return value;
    }
    return value;
}

void EstimatorConfig::validate() const {
    for (double z : zeta)
        if (!(z > 1.0)) throw std::invalid_argument("debias level zeta must be > 1");
    for (double p : p_scalers)
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("threshold scaler p must lie in (0, 1]");
    if (v_rule.kind == ThresholdRule::Kind::BvPower &&
        !(v_rule.alpha > 0.0 && v_rule.alpha < 0.5))
        throw std::invalid_argument("threshold exponent alpha must lie in (0, 1/2)");
    if (v_rule.kind == ThresholdRule::Kind::BvScale && !(v_rule.v0 > 0.0))
        throw std::invalid_argument("threshold scale v0 must be > 0");
    if (!(cf.h_exponent > 0.0)) throw std::invalid_argument("cf bandwidth exponent must be > 0");
    if (!(cf.lambda > 1.0)) throw std::invalid_argument("cf lambda must be > 1");
    if (!(cf.p > 0.0 && cf.p < 1.0)) throw std::invalid_argument("cf p must lie in (0, 1)");
    if (m_rule.kind == BandwidthRule::Kind::Const && !(m_rule.value >= 1.0))
        throw std::invalid_argument("bandwidth multiplier must be >= 1");
}

double bipower_variation(const PathSample& path) {
    const long n = path.n_increments();
    if (n < 2) throw std::invalid_argument("bipower_variation: need >= 3 points");
    double sum = 0.0;
    double prev = std::abs(path.increment(1));
    for (long i = 2; i <= n; ++i) {
        const double cur = std::abs(path.increment(i));
        sum += cur * prev;
        prev = cur;
    }
    return 0.5 * std::numbers::pi * sum / path.horizon();
}

double threshold_v(double bv, double dt, const ThresholdRule& rule) {
    if (!(bv >= 0.0)) throw std::invalid_argument("threshold_v: bv must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("threshold_v: dt must be > 0");
    if (bv == 0.0) return kInf;  // degenerate path: truncate nothing
    switch (rule.kind) {
        case ThresholdRule::Kind::BvPower: return std::sqrt(bv) * std::pow(dt, rule.alpha);
        case ThresholdRule::Kind::BvScale: return std::sqrt(bv) * rule.v0;
    }
    return kInf;
}

// --- SpotVolWorkspace ------------------------------------------------------

SpotVolWorkspace::SpotVolWorkspace(const PathSample& path, Kernel kernel,
                                   double m_multiplier)
    : kernel_(std::move(kernel)), m_(m_multiplier) {
    if (!(m_multiplier >= 1.0))
        throw std::invalid_argument("bandwidth multiplier must be >= 1");
    const long n = path.n_increments();
    dt_ = path.dt();
    horizon_ = path.horizon();
    bandwidth_ = m_ * dt_;

    t_left_.resize(n);
    dx_.resize(n);
    for (long i = 0; i < n; ++i) {
        t_left_[i] = path.times[i];
        dx_[i] = path.x[i + 1] - path.x[i];
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(), [this](std::uint32_t a, std::uint32_t b) {
        return std::abs(dx_[a]) < std::abs(dx_[b]);
    });
    sorted_abs_.resize(n);
    for (long i = 0; i < n; ++i) sorted_abs_[i] = std::abs(dx_[order_[i]]);

    const double spacing = bandwidth_;
    const long count = static_cast<long>(std::floor(horizon_ / spacing));
    agg_taus_.reserve(count);
    for (long i = 1; i <= count; ++i) agg_taus_.push_back(static_cast<double>(i) * spacing);
}

SpotVolWorkspace::TauContext& SpotVolWorkspace::context(double tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;

    TauContext ctx;
    const std::size_t n = dx_.size();
    std::vector<double> weight(n);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = eval_scaled(kernel_, bandwidth_, t_left_[i] - tau);
        weight[i] = w;
        denom += w;
    }
    ctx.denom_sum = denom;
    ctx.prefix.resize(n + 1);
    ctx.prefix[0] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::uint32_t idx = order_[r];
        ctx.prefix[r + 1] = ctx.prefix[r] + weight[idx] * dx_[idx] * dx_[idx];
    }
    return cache_.emplace(tau, std::move(ctx)).first->second;
}

double SpotVolWorkspace::denominator_sum(double tau) { return context(tau).denom_sum; }

double SpotVolWorkspace::stage0_value(double tau, double v, long* kept) {
    TauContext& ctx = context(tau);
    if (ctx.denom_sum <= 0.0)
        throw std::runtime_error("spot volatility estimator: kernel denominator is zero at tau=" +
                                 std::to_string(tau));
    const auto it = std::upper_bound(sorted_abs_.begin(), sorted_abs_.end(), v);
    const std::size_t r = static_cast<std::size_t>(it - sorted_abs_.begin());
    if (kept) *kept = static_cast<long>(r);
    return ctx.prefix[r] / (dt_ * ctx.denom_sum);
}

SpotEstimate spot_vol_truncated(const PathSample& path, double tau, double m,
                                double v, const Kernel& kernel) {
    if (!(tau > 0.0 && tau < path.horizon()))
        throw std::invalid_argument("tau must lie strictly inside (0, T)");
    if (!(v > 0.0)) throw std::invalid_argument("threshold v must be positive");
    SpotVolWorkspace ws(path, kernel, m);
    long kept = 0;
    SpotEstimate est;
    est.tau = tau;
    est.stage = 0;
    est.value = ws.stage0_value(tau, v, &kept);
    est.diag.truncation_count = path.n_increments() - kept;
    est.diag.base_thresholds = {v};
    est.diag.last_numerator = est.value;
    est.diag.last_denominator = 1.0;
    return est;
}

double debias_step(double c_v, double c_zv, double c_z2v) {
    const double den = c_z2v - 2.0 * c_zv + c_v;
    if (guard_trips(den, c_v, c_zv, c_z2v)) return c_v;
    const double num = (c_zv - c_v) * (c_zv - c_v);
    return c_v - num / den;
}

// --- theoretical debias recursion -----------------------------------------

namespace {

double theo_value(SpotVolWorkspace& ws, double tau, double w,
                  std::span<const double> zeta, int stage, SpotDiagnostics& diag) {
    if (stage == 0) {
        diag.base_thresholds.push_back(w);
        return ws.stage0_value(tau, w);
    }
    const double z = zeta[stage - 1];
    const double c1 = theo_value(ws, tau, w, zeta, stage - 1, diag);
    const double c2 = theo_value(ws, tau, z * w, zeta, stage - 1, diag);
    const double c3 = theo_value(ws, tau, z * z * w, zeta, stage - 1, diag);
    const double den = c3 - 2.0 * c2 + c1;
    diag.last_numerator = (c2 - c1) * (c2 - c1);
    diag.last_denominator = den;
    if (guard_trips(den, c1, c2, c3)) {
        diag.guard_fired = true;
        return c1;
    }
    return c1 - diag.last_numerator / den;
}

}  // namespace

SpotEstimate eval_theoretical(SpotVolWorkspace& ws, double tau, double v,
                              std::span<const double> zeta, int stage) {
    if (stage < 0 || stage > 2) throw std::invalid_argument("debias stage must be 0, 1 or 2");
    if (static_cast<int>(zeta.size()) < stage)
        throw std::invalid_argument("need a debias level per stage");
    SpotEstimate est;
    est.tau = tau;
    est.stage = stage;
    est.value = theo_value(ws, tau, v, zeta, stage, est.diag);
    long kept = 0;
    ws.stage0_value(tau, v, &kept);
    est.diag.truncation_count = ws.n_increments() - kept;
    // de-duplicate the recorded thresholds (the recursion revisits some)
    auto& bt = est.diag.base_thresholds;
    std::sort(bt.begin(), bt.end());
    bt.erase(std::unique(bt.begin(), bt.end()), bt.end());
    if (est.value < 0.0) est.diag.negative_value = true;
    return est;
}

SpotEstimate spot_vol_debiased_theoretical(const PathSample& path, double tau,
                                           const EstimatorConfig& config, int stage) {
    config.validate();
    SpotVolWorkspace ws(path, config.kernel, config.m_rule.multiplier(path.dt()));
    const double v = threshold_v(bipower_variation(path), path.dt(), config.v_rule);
    SpotEstimate est = eval_theoretical(ws, tau, v, config.zeta, stage);
    if (config.clamp_negative && est.value < 0.0) {
        est.value = 0.0;
        est.diag.clamped_to_zero = true;
    }
    return est;
}

// --- practical debias ------------------------------------------------------

PracticalDebiaser::PracticalDebiaser(SpotVolWorkspace& ws, std::vector<double> zeta,
                                     std::vector<double> p_scalers)
    : ws_(ws), zeta_(std::move(zeta)), p_(std::move(p_scalers)) {}

double PracticalDebiaser::a_coeff(int stage, double v, SpotDiagnostics& diag) {
    const auto key = std::make_pair(stage, v);
    if (auto it = a_cache_.find(key); it != a_cache_.end()) return it->second;

    const double z = zeta_[stage - 1];
    const double p = p_[stage - 1];
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    SpotDiagnostics scratch;
    for (double tau : ws_.aggregation_taus()) {
        s1 += value(tau, p * v, stage - 1, scratch);
        s2 += value(tau, z * p * v, stage - 1, scratch);
        s3 += value(tau, z * z * p * v, stage - 1, scratch);
    }
    const double num = s2 - s1;
    const double den = s3 - 2.0 * s2 + s1;
    double a;
    if (guard_trips(den, s1, s2, s3)) {
        diag.guard_fired = true;
        a = 0.0;  // correction skipped
    } else {
        // Sign chosen to match the theoretical bias terms: + at stage 1,
        // - at stage 2.
        const double sign = (stage == 1) ? 1.0 : -1.0;
        a = sign * num / den;
    }
    diag.last_numerator = num;
    diag.last_denominator = den;
    a_cache_.emplace(key, a);
    return a;
}

double PracticalDebiaser::value(double tau, double w, int stage, SpotDiagnostics& diag) {
    if (stage == 0) {
        diag.base_thresholds.push_back(w);
        return ws_.stage0_value(tau, w);
    }
    const double prev = value(tau, w, stage - 1, diag);
    const double a_raw = a_coeff(stage, w, diag);
    double a = a_raw;
    if (a < 0.0) {
        a = 0.0;
        diag.clamp_a_fired = true;
    }
    const double z = zeta_[stage - 1];
    const double shifted = value(tau, z * w, stage - 1, diag);
    double corr = a * (shifted - prev);
    if (corr < 0.0) {
        corr = 0.0;
        if (a > 0.0) diag.clamp_corr_fired = true;
    }
    return prev - corr;
}

SpotEstimate PracticalDebiaser::evaluate(double tau, double v, int stage) {
    if (stage < 0 || stage > 2) throw std::invalid_argument("debias stage must be 0, 1 or 2");
    if (static_cast<int>(zeta_.size()) < stage || static_cast<int>(p_.size()) < stage)
        throw std::invalid_argument("need zeta and p entries per stage");
    SpotEstimate est;
    est.tau = tau;
    est.stage = stage;
    est.value = value(tau, v, stage, est.diag);
    long kept = 0;
    ws_.stage0_value(tau, v, &kept);
    est.diag.truncation_count = ws_.n_increments() - kept;
    auto& bt = est.diag.base_thresholds;
    std::sort(bt.begin(), bt.end());
    bt.erase(std::unique(bt.begin(), bt.end()), bt.end());
    if (est.value < 0.0) est.diag.negative_value = true;
    return est;
}

SpotEstimate spot_vol_debiased_practical(const PathSample& path, double tau,
                                         const EstimatorConfig& config, int stage) {
    config.validate();
    SpotVolWorkspace ws(path, config.kernel, config.m_rule.multiplier(path.dt()));
    const double v = threshold_v(bipower_variation(path), path.dt(), config.v_rule);
    PracticalDebiaser deb(ws, config.zeta, config.p_scalers);
    SpotEstimate est = deb.evaluate(tau, v, stage);
    if (config.clamp_negative && est.value < 0.0) {
        est.value = 0.0;
        est.diag.clamped_to_zero = true;
    }
    return est;
}

// --- characteristic-function estimators ------------------------------------

CfWorkspace::CfWorkspace(const PathSample& path, Kernel kernel, double h)
    : path_(path), kernel_(std::move(kernel)), h_(h), dt_(path.dt()) {
    if (!(h > 0.0)) throw std::invalid_argument("cf bandwidth h must be positive");
}

double CfWorkspace::smoothed_cosine(double tau, double u) {
    if (!(u > 0.0)) throw std::invalid_argument("cf frequency u must be positive");
    const long n = path_.n_increments();
    const double sqrt_dt = std::sqrt(dt_);
    long lo = 1, hi = n;
    const KernelSupport sup = kernel_.support();
    if (sup.bounded) {
        // kernel argument is (i dt - tau) / h; restrict to its support
        lo = std::max<long>(1, static_cast<long>(std::ceil((tau + sup.lo * h_) / dt_ - 1e-12)));
        hi = std::min<long>(n, static_cast<long>(std::floor((tau + sup.hi * h_) / dt_ + 1e-12)));
    }
    double sum = 0.0;
    for (long i = lo; i <= hi; ++i) {
        const double w = eval_scaled(kernel_, h_, static_cast<double>(i) * dt_ - tau);
        if (w == 0.0) continue;
        sum += w * std::cos(u * (path_.x[i] - path_.x[i - 1]) / sqrt_dt);
    }
    return dt_ * sum;
}

double CfWorkspace::spot_vol(double tau, double u) {
    const auto key = std::make_pair(tau, u);
    if (auto it = spot_cache_.find(key); it != spot_cache_.end()) return it->second;
    const double s = smoothed_cosine(tau, u);
    const double floor_val = std::sqrt(dt_ / h_);
    const double bar = -2.0 / (u * u) * std::log(std::max(s, floor_val));
    const double sh = std::sinh(bar);
    const double hat = bar - 2.0 * dt_ / (u * u * h_) * sh * sh;
    spot_cache_.emplace(key, hat);
    return hat;
}

double CfWorkspace::debiased(double tau, double u, double lambda, double p,
                             double m_multiplier, SpotDiagnostics* diag) {
    const double hat = spot_vol(tau, u);
    const double spacing = m_multiplier * dt_;
    const long count = static_cast<long>(std::floor(path_.horizon() / spacing));
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (long i = 1; i <= count; ++i) {
        const double g = static_cast<double>(i) * spacing;
        s1 += spot_vol(g, p * u);
        s2 += spot_vol(g, lambda * p * u);
        s3 += spot_vol(g, lambda * lambda * p * u);
    }
    const double num = s2 - s1;
    const double den = s3 - 2.0 * s2 + s1;
    if (diag) {
        diag->last_numerator = num;
        diag->last_denominator = den;
    }
    if (guard_trips(den, s1, s2, s3)) {
        if (diag) diag->guard_fired = true;
        return hat;  // correction skipped
    }
    const double local_diff = std::min(spot_vol(tau, lambda * u) - spot_vol(tau, u), 0.0);
    if (diag && local_diff == 0.0) diag->clamp_corr_fired = true;
    const double correction = num * local_diff / den;
    return hat - correction;
}

double cf_smoothed_cosine(const PathSample& path, double tau, double u, double h,
                          const Kernel& kernel) {
    CfWorkspace ws(path, kernel, h);
    return ws.smoothed_cosine(tau, u);
}

double cf_spot_vol(const PathSample& path, double tau, double u, double h,
                   const Kernel& kernel) {
    CfWorkspace ws(path, kernel, h);
    return ws.spot_vol(tau, u);
}

double cf_spot_vol_debiased(const PathSample& path, double tau,
                            const EstimatorConfig& config) {
    config.validate();
    const double dt = path.dt();
    const double h = std::pow(dt, config.cf.h_exponent);
    const double bv = bipower_variation(path);
    if (!(bv > 0.0))
        throw std::runtime_error("cf estimator: bipower variation is zero, u_n undefined");
    const double u = std::pow(dt, config.cf.u_exponent) / std::sqrt(bv);
    CfWorkspace ws(path, config.kernel, h);
    return ws.debiased(tau, u, config.cf.lambda, config.cf.p,
                       config.m_rule.multiplier(dt));
}

}  // namespace spotvol
