// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spotvol/config.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/harness.hpp"
#include "spotvol/report.hpp"
#include "spotvol/theory.hpp"
#include "test_util.hpp"

using namespace spotvol;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("CRITERION %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double metric_for(const ExperimentReport& rep, const std::string& name) {
    for (const auto& m : rep.estimators)
        if (m.name == name) return m.rmse;
    std::fprintf(stderr, "missing estimator %s\n", name.c_str());
    ++g_failures;
    return std::numeric_limits<double>::quiet_NaN();
}

ExperimentConfig liu_config(double y, int paths) {
    ExperimentConfig c = preset_config("liu2018", y);
    c.n_paths = paths;
    c.master_seed = 20260801;
    return c;
}

void keep_estimators(ExperimentConfig& c, const std::vector<std::string>& names) {
    std::vector<EstimatorSetup> keep;
    for (const auto& e : c.estimators)
        for (const auto& n : names)
            if (e.name == n) keep.push_back(e);
    c.estimators = keep;
}

// --- criterion 1: Table-1 spot check at Y = 1.6 -----------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = liu_config(1.6, 200);
    keep_estimators(c, {"trunc_exp", "debias1_exp", "debias2_exp"});
    const ExperimentReport rep = run_experiment(c);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double r0 = metric_for(rep, "trunc_exp");
    const double r1 = metric_for(rep, "debias1_exp");
    const double r2 = metric_for(rep, "debias2_exp");
    const bool in_range = r0 >= 0.09 && r0 <= 0.14 && r1 >= 0.09 && r1 <= 0.14 &&
                          r2 >= 0.09 && r2 <= 0.14;
    const bool time_ok = elapsed <= 300.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "stage-0/1/2 RMSE = %.4f / %.4f / %.4f target [0.09, 0.14], "
                  "runtime %.1f s (limit 300)",
                  r0, r1, r2, elapsed);
    report(1, in_range && time_ok, buf);
}

// --- criterion 2: dominance over the cf estimator at Y = 1.75 ---------------

void criterion_2() {
    ExperimentConfig c = liu_config(1.75, 200);
    keep_estimators(c, {"debias2_exp", "cf"});
    const ExperimentReport rep = run_experiment(c);
    const double ours = metric_for(rep, "debias2_exp");
    const double cf = metric_for(rep, "cf");
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "RMSE(debias2_exp) = %.4f vs cf = %.4f, ratio %.3f (need <= 0.5)",
                  ours, cf, ours / cf);
    report(2, ours <= 0.5 * cf, buf);
}

// --- criterion 3: exponential kernel beats the uniform kernel ---------------

void criterion_3() {
    bool all = true;
    std::string detail;
    for (double y : {0.8, 1.2, 1.6, 1.75}) {
        ExperimentConfig c = liu_config(y, 200);
        keep_estimators(c, {"debias2_exp", "debias2_unif"});
        const ExperimentReport rep = run_experiment(c);
        const double e = metric_for(rep, "debias2_exp");
        const double u = metric_for(rep, "debias2_unif");
        char buf[96];
        std::snprintf(buf, sizeof(buf), "Y=%.2f: %.4f vs %.4f%s  ", y, e, u,
                      e <= u ? "" : " (!)");
        detail += buf;
        all = all && (e <= u);
    }
    report(3, all, "stage-2 exp <= unif: " + detail);
}

// --- criterion 4: Table-3 spot check (realistic design) ---------------------

void criterion_4() {
    ExperimentConfig c = preset_config("realistic", 1.6);
    c.n_paths = 200;
    c.master_seed = 20260804;
    keep_estimators(c, {"trunc_exp"});
    const ExperimentReport rep = run_experiment(c);
    const double r = metric_for(rep, "trunc_exp");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "stage-0 RMSE = %.5f target [0.018, 0.030]", r);
    report(4, r >= 0.018 && r <= 0.030, buf);
}

// --- criterion 5: Proposition-1 oracle ---------------------------------------

void criterion_5() {
    // The activity grid, dt, v, sigma and draw count come from the criterion;
    // the stable scale is free and is set inside the expansion's validity
    // window (at scale 0.5 the higher-order remainder alone measures ~22 se
    // by exact quadrature, swamping any sampler).
    const double dt = 1e-4, sigma2 = 0.16, scale = 0.04;
    const double v = std::pow(dt, 5.0 / 12.0);
    bool all = true;
    std::string detail;
    int sub = 0;
    for (double y : {1.2, 1.5, 1.75}) {
        JumpActivityParams params;
        params.y = y;
        params.c_plus = params.c_minus = stable_scale_to_levy_constant(scale, y);
        params.chi = 1.0;
        params.sigma2 = sigma2;

        RngStream s1 = RngStream::substream(555, 2 * sub);
        const auto mc = mc_truncated_moment_oracle(1, params, dt, v, 1000000, s1);
        const double expansion = truncated_moment_expansion(1, params, dt, v);
        const double dev = std::abs(expansion - mc.estimate) / mc.std_error;

        RngStream s2 = RngStream::substream(555, 2 * sub + 1);
        const auto mcd =
            mc_truncated_moment_difference_oracle(params, dt, v, 1.5, 1000000, s2);
        const double diff_expansion = truncated_moment_difference(params, dt, v, 1.5);
        const double devd = std::abs(diff_expansion - mcd.estimate) / mcd.std_error;

        char buf[96];
        std::snprintf(buf, sizeof(buf), "Y=%.2f: %.2f se, diff %.2f se  ", y, dev, devd);
        detail += buf;
        all = all && dev <= 4.0 && devd <= 4.0;
        ++sub;
    }
    report(5, all, "expansion vs MC (limit 4 se): " + detail);
}

// --- criterion 6: debias algebra ----------------------------------------------

void criterion_6() {
    RngStream s(777);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double cstar = 0.5 + 1.5 * s.uniform_open();
        const double a = -2.0 + 4.0 * s.uniform_open();
        const double beta = 0.3 + 1.2 * s.uniform_open();
        const double v = 0.01 + 0.19 * s.uniform_open();
        const double zeta = 1.3 + 0.7 * s.uniform_open();
        auto curve = [&](double w) { return cstar + a * std::pow(w, beta); };
        const double out = debias_step(curve(v), curve(zeta * v), curve(zeta * zeta * v));
        worst = std::max(worst, std::abs(out - cstar) / std::abs(cstar));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst relative error %.3e (limit 1e-12)", worst);
    report(6, worst <= 1e-12, buf);
}

// --- criterion 7: jump-free unbiasedness and CI coverage ----------------------

void criterion_7() {
    // Pure Brownian sigma = 1 on n = 1e4 steps; v from the bipower rule.
    ModelSpec m;
    m.x0 = 0.0;
    m.v0 = 1.0;
    m.kappa = 0.0;
    m.theta = 1.0;
    m.xi = 0.0;
    m.rho = 0.0;
    m.jump_y = 1.5;
    m.jump_scale = 0.0;
    m.horizon_t = 1.0;
    m.n_steps = 10000;

    const int paths = 500;
    const double m_mean = 100.0;                    // dt^{-1/2}
    const double m_ci = std::pow(1e-4, -0.4);       // dt^{-0.4}
    const Kernel kernel = Kernel::exponential();
    std::vector<double> stage0;
    long covered = 0;
    for (int j = 0; j < paths; ++j) {
        const PathSample path = simulate_path(m, 20260807, j);
        const double v = threshold_v(bipower_variation(path), path.dt(),
                                     ThresholdRule::bv_power(5.0 / 12.0));
        SpotVolWorkspace ws_mean(path, kernel, m_mean);
        stage0.push_back(ws_mean.stage0_value(0.5, v));

        SpotVolWorkspace ws_ci(path, kernel, m_ci);
        SpotEstimate est;
        est.tau = 0.5;
        est.value = std::max(ws_ci.stage0_value(0.5, v), 0.0);
        const ConfidenceInterval ci = feasible_ci(est, m_ci, kernel, 0.95);
        if (ci.lo <= 1.0 && 1.0 <= ci.hi) ++covered;
    }
    const auto ms = testutil::mean_se(stage0);
    const double coverage = static_cast<double>(covered) / paths;
    const bool mean_ok = std::abs(ms.mean - 1.0) <= 3.0 * ms.se;
    const bool cover_ok = coverage >= 0.90 && coverage <= 0.98;
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "mean(stage-0) = %.4f (se %.4f, need |mean-1| <= %.4f), coverage = %.3f "
                  "(need [0.90, 0.98])",
                  ms.mean, ms.se, 3.0 * ms.se, coverage);
    report(7, mean_ok && cover_ok, buf);
}

// --- criterion 8: analytic kernel functionals ---------------------------------

void criterion_8() {
    const double k_exp = k_squared_integral(Kernel::exponential());
    const double k_unif = k_squared_integral(Kernel::uniform2());
    const double k_k3 = k_squared_integral(Kernel::quartic_k3());
    const double l_exp = l_squared_integral(Kernel::exponential());
    const bool ok = std::abs(k_exp - 0.25) <= 1e-6 && std::abs(k_unif - 0.5) <= 1e-6 &&
                    std::abs(k_k3 - 5.0 / 7.0) <= 1e-6 && std::abs(l_exp - 0.25) <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "intK2: exp %.8f unif %.8f k3 %.8f; intL2 exp %.8f (tol 1e-6)", k_exp,
                  k_unif, k_k3, l_exp);
    report(8, ok, buf);
}

// --- criterion 9: determinism across worker counts ----------------------------

void criterion_9() {
    ExperimentConfig c = liu_config(1.6, 64);
    std::string first;
    bool identical = true;
    for (int workers : {1, 4, 16}) {
        c.workers = workers;
        const ExperimentReport rep = run_experiment(c);
        const std::string json = report_to_json(rep, render_config_text(c));
        if (first.empty()) first = json;
        else identical = identical && (json == first);
    }
    report(9, identical, "report.json bit-identical at 1, 4, 16 workers (M = 64)");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures > 0) {
        std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
