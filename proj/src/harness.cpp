#include "spotvol/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace spotvol {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int worker_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) across `workers` threads. Work items are
// claimed through an atomic counter; ordering is irrelevant because results
// land in slot i and are reduced in index order afterwards.
void parallel_for(long count, int workers, const std::function<void(long)>& fn) {
    workers = static_cast<int>(std::min<long>(worker_count(workers), count));
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void tally(FlagTally& t, const SpotDiagnostics& d) {
    if (d.guard_fired) ++t.guard;
    if (d.clamp_a_fired) ++t.clamp_a;
    if (d.clamp_corr_fired) ++t.clamp_corr;
    if (d.negative_value) ++t.negative;
    if (d.clamped_to_zero) ++t.clamped_to_zero;
}

// Per-path evaluation engine. Workspaces are shared between estimator setups
// with matching (kernel, bandwidth), so stage-0/1/2 variants and grid-search
// tunings reuse the same kernel prefix sums.
class PathEvaluator {
public:
    PathEvaluator(const PathSample& path, const std::vector<long>& grid)
        : path_(path), grid_(grid), dt_(path.dt()), bv_(bipower_variation(path)) {}

    double bv() const { return bv_; }

    // Estimates at every grid point; failed evaluations stay NaN and bump the
    // error tally.
    std::vector<double> evaluate(const EstimatorSetup& setup, FlagTally& flags) {
        std::vector<double> out(grid_.size(), kNaN);
        try {
            if (setup.is_cf())
                evaluate_cf(setup, out, flags);
            else
                evaluate_spot(setup, out, flags);
        } catch (const std::exception&) {
            flags.errors += static_cast<long>(grid_.size());
        }
        return out;
    }

private:
    void evaluate_cf(const EstimatorSetup& setup, std::vector<double>& out,
                     FlagTally& flags) {
        if (!(bv_ > 0.0)) throw std::runtime_error("bipower variation is zero");
        const double h = std::pow(dt_, setup.config.cf.h_exponent);
        const double u = std::pow(dt_, setup.config.cf.u_exponent) / std::sqrt(bv_);
        const double m = setup.config.m_rule.multiplier(dt_);
        CfWorkspace& ws = cf_workspace(setup.config.kernel, h);
        for (std::size_t gi = 0; gi < grid_.size(); ++gi) {
            const double tau = static_cast<double>(grid_[gi]) * dt_;
            try {
                double val;
                if (setup.kind == EstimatorKind::Cf) {
                    val = ws.spot_vol(tau, u);
                } else {
                    SpotDiagnostics diag;
                    val = ws.debiased(tau, u, setup.config.cf.lambda, setup.config.cf.p,
                                      m, &diag);
                    tally(flags, diag);
                }
                if (setup.config.clamp_negative && val < 0.0) {
                    val = 0.0;
                    ++flags.clamped_to_zero;
                }
                out[gi] = val;
            } catch (const std::exception&) {
                ++flags.errors;
            }
        }
    }

    void evaluate_spot(const EstimatorSetup& setup, std::vector<double>& out,
                       FlagTally& flags) {
        SpotVolWorkspace& ws =
            spot_workspace(setup.config.kernel, setup.config.m_rule.multiplier(dt_));
        const double v = threshold_v(bv_, dt_, setup.config.v_rule);
        std::unique_ptr<PracticalDebiaser> deb;
        if (setup.kind == EstimatorKind::Debias1 || setup.kind == EstimatorKind::Debias2)
            deb = std::make_unique<PracticalDebiaser>(ws, setup.config.zeta,
                                                      setup.config.p_scalers);
        for (std::size_t gi = 0; gi < grid_.size(); ++gi) {
            const double tau = static_cast<double>(grid_[gi]) * dt_;
            try {
                SpotEstimate est;
                switch (setup.kind) {
                    case EstimatorKind::Trunc:
                        est.tau = tau;
                        est.value = ws.stage0_value(tau, v);
                        break;
                    case EstimatorKind::Debias1:
                    case EstimatorKind::Debias2:
                        est = deb->evaluate(tau, v, setup.stage());
                        break;
                    case EstimatorKind::TheoDebias1:
                    case EstimatorKind::TheoDebias2:
                        est = eval_theoretical(ws, tau, v, setup.config.zeta, setup.stage());
                        break;
                    default: break;
                }
                if (setup.config.clamp_negative && est.value < 0.0) {
                    est.value = 0.0;
                    est.diag.clamped_to_zero = true;
                }
                out[gi] = est.value;
                tally(flags, est.diag);
            } catch (const std::exception&) {
                ++flags.errors;
            }
        }
    }

    SpotVolWorkspace& spot_workspace(const Kernel& kernel, double m) {
        for (std::size_t i = 0; i < spot_keys_.size(); ++i)
            if (spot_keys_[i].first == kernel.name() && spot_keys_[i].second == m)
                return *spot_ws_[i];
        spot_keys_.emplace_back(kernel.name(), m);
        spot_ws_.push_back(std::make_unique<SpotVolWorkspace>(path_, kernel, m));
        return *spot_ws_.back();
    }

    CfWorkspace& cf_workspace(const Kernel& kernel, double h) {
        for (std::size_t i = 0; i < cf_keys_.size(); ++i)
            if (cf_keys_[i].first == kernel.name() && cf_keys_[i].second == h)
                return *cf_ws_[i];
        cf_keys_.emplace_back(kernel.name(), h);
        cf_ws_.push_back(std::make_unique<CfWorkspace>(path_, kernel, h));
        return *cf_ws_.back();
    }

    const PathSample& path_;
    const std::vector<long>& grid_;
    double dt_ = 0.0;
    double bv_ = 0.0;
    std::vector<std::pair<std::string, double>> spot_keys_;
    std::vector<std::unique_ptr<SpotVolWorkspace>> spot_ws_;
    std::vector<std::pair<std::string, double>> cf_keys_;
    std::vector<std::unique_ptr<CfWorkspace>> cf_ws_;
};

}  // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Trunc: return "trunc";
        case EstimatorKind::Debias1: return "debias1";
        case EstimatorKind::Debias2: return "debias2";
        case EstimatorKind::TheoDebias1: return "theo_debias1";
        case EstimatorKind::TheoDebias2: return "theo_debias2";
        case EstimatorKind::Cf: return "cf";
        case EstimatorKind::CfDebias: return "cf_debias";
    }
    return "trunc";
}

EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "trunc") return EstimatorKind::Trunc;
    if (s == "debias1") return EstimatorKind::Debias1;
    if (s == "debias2") return EstimatorKind::Debias2;
    if (s == "theo_debias1") return EstimatorKind::TheoDebias1;
    if (s == "theo_debias2") return EstimatorKind::TheoDebias2;
    if (s == "cf") return EstimatorKind::Cf;
    if (s == "cf_debias") return EstimatorKind::CfDebias;
    throw std::invalid_argument("unknown estimator kind: " + s);
}

int EstimatorSetup::stage() const {
    switch (kind) {
        case EstimatorKind::Debias1:
        case EstimatorKind::TheoDebias1: return 1;
        case EstimatorKind::Debias2:
        case EstimatorKind::TheoDebias2: return 2;
        default: return 0;
    }
}

std::string EstimatorSetup::tuning_string() const {
    char buf[160];
    if (kind == EstimatorKind::CfDebias) {
        std::snprintf(buf, sizeof(buf), "lambda=%.4g p=%.4g", config.cf.lambda, config.cf.p);
        return buf;
    }
    if (kind == EstimatorKind::Cf || kind == EstimatorKind::Trunc) return "-";
    std::string out = "zeta=(";
    const int k = stage();
    for (int i = 0; i < k; ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.4g", i ? "," : "", config.zeta[i]);
        out += buf;
    }
    out += ")";
    if (kind == EstimatorKind::Debias1 || kind == EstimatorKind::Debias2) {
        out += " p=(";
        for (int i = 0; i < k; ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.4g", i ? "," : "", config.p_scalers[i]);
            out += buf;
        }
        out += ")";
    }
    return out;
}

void ExperimentConfig::validate() const {
    model.validate();
    if (n_paths < 1) throw std::invalid_argument("experiment needs n_paths >= 1");
    if (estimators.empty()) throw std::invalid_argument("experiment needs >= 1 estimator");
    for (const auto& e : estimators) {
        e.config.validate();
        const int k = e.stage();
        if (static_cast<int>(e.config.zeta.size()) < k)
            throw std::invalid_argument(e.name + ": needs " + std::to_string(k) +
                                        " zeta entries");
        if ((e.kind == EstimatorKind::Debias1 || e.kind == EstimatorKind::Debias2) &&
            static_cast<int>(e.config.p_scalers.size()) < k)
            throw std::invalid_argument(e.name + ": needs " + std::to_string(k) +
                                        " p entries");
    }
}

std::vector<long> tau_grid(long n) {
    if (n < 100) throw std::domain_error("tau_grid needs n >= 100");
    const long step = n / 100;
    std::vector<long> grid;
    grid.reserve(81);
    for (long i = 10; i <= 90; ++i) grid.push_back(i * step);
    return grid;
}

MetricsResult compute_metrics(const std::vector<std::vector<double>>& estimates,
                              const std::vector<std::vector<double>>& truths,
                              double epsilon_truth) {
    if (estimates.size() != truths.size())
        throw std::invalid_argument("compute_metrics: path count mismatch");
    const std::size_t m = estimates.size();
    if (m == 0) throw std::invalid_argument("compute_metrics: empty input");
    MetricsResult res;
    res.mse_j.resize(m);
    res.ae_j.resize(m);
    res.e_j.resize(m);
    double mse_sum = 0.0, ae_sum = 0.0, e_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (estimates[j].size() != truths[j].size())
            throw std::invalid_argument("compute_metrics: grid size mismatch");
        const std::size_t g = estimates[j].size();
        double mse = 0.0, ae = 0.0, e = 0.0;
        long n_mse = 0, n_rel = 0;
        for (std::size_t i = 0; i < g; ++i) {
            const double est = estimates[j][i];
            const double truth = truths[j][i];
            if (std::isnan(est)) continue;  // failed evaluation
            const double err = est - truth;
            mse += err * err;
            ++n_mse;
            if (truth < epsilon_truth) {
                ++res.excluded_relative_points;
                continue;
            }
            ae += std::abs(err) / truth;
            e += err / truth;
            ++n_rel;
        }
        res.mse_j[j] = n_mse > 0 ? mse / static_cast<double>(n_mse) : 0.0;
        res.ae_j[j] = n_rel > 0 ? ae / static_cast<double>(n_rel) : 0.0;
        res.e_j[j] = n_rel > 0 ? e / static_cast<double>(n_rel) : 0.0;
        mse_sum += res.mse_j[j];
        ae_sum += res.ae_j[j];
        e_sum += res.e_j[j];
    }
    const double dm = static_cast<double>(m);
    res.rmse = std::sqrt(mse_sum / dm);
    res.are = ae_sum / dm;
    res.re = e_sum / dm;
    return res;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<long> grid = tau_grid(config.model.n_steps);
    const long m = config.n_paths;
    const std::size_t n_est = config.estimators.size();

    struct PathResult {
        std::vector<std::vector<double>> estimates;  // [estimator][tau]
        std::vector<double> truths;
        std::vector<FlagTally> flags;
    };
    std::vector<PathResult> evals(m);

    parallel_for(m, config.workers, [&](long j) {
        const PathSample path =
            simulate_path(config.model, config.master_seed, static_cast<std::uint64_t>(j));
        PathResult& r = evals[j];
        r.truths.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) r.truths[i] = path.v[grid[i]];
        r.flags.assign(n_est, FlagTally{});
        r.estimates.resize(n_est);
        PathEvaluator evaluator(path, grid);
        for (std::size_t ei = 0; ei < n_est; ++ei)
            r.estimates[ei] = evaluator.evaluate(config.estimators[ei], r.flags[ei]);
    });

    ExperimentReport report;
    report.tau_indices = grid;
    report.master_seed = config.master_seed;
    report.n_paths = config.n_paths;
    report.estimators.resize(n_est);

    // Path-order reduction keeps the report independent of scheduling.
    for (std::size_t ei = 0; ei < n_est; ++ei) {
        std::vector<std::vector<double>> estimates(m), truths(m);
        for (long j = 0; j < m; ++j) {
            estimates[j] = evals[j].estimates[ei];
            truths[j] = evals[j].truths;
        }
        const MetricsResult metrics = compute_metrics(estimates, truths, config.epsilon_truth);
        EstimatorMetrics& em = report.estimators[ei];
        em.name = config.estimators[ei].name;
        em.kind = to_string(config.estimators[ei].kind);
        em.tuning = config.estimators[ei].tuning_string();
        em.rmse = metrics.rmse;
        em.are = metrics.are;
        em.re = metrics.re;
        em.mse_j = metrics.mse_j;
        em.ae_j = metrics.ae_j;
        em.e_j = metrics.e_j;
        em.excluded_relative_points = metrics.excluded_relative_points;
        for (long j = 0; j < m; ++j) {
            const FlagTally& f = evals[j].flags[ei];
            em.flags.guard += f.guard;
            em.flags.clamp_a += f.clamp_a;
            em.flags.clamp_corr += f.clamp_corr;
            em.flags.negative += f.negative;
            em.flags.clamped_to_zero += f.clamped_to_zero;
            em.flags.errors += f.errors;
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// --- grid search -------------------------------------------------------------

std::vector<double> default_zeta_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 16; ++i) g.push_back(1.1 + 0.05 * i);
    return g;
}

std::vector<double> default_p_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 16; ++i) g.push_back(0.1 + 0.05 * i);
    return g;
}

namespace {

std::vector<GridPoint> enumerate_grid(const EstimatorSetup& setup,
                                      const std::vector<double>& zeta_grid,
                                      const std::vector<double>& p_grid,
                                      const std::vector<double>& lambda_grid) {
    std::vector<GridPoint> points;
    switch (setup.kind) {
        case EstimatorKind::CfDebias:
            for (double l : lambda_grid)
                for (double p : p_grid) points.push_back({{l}, {p}, 0.0});
            break;
        case EstimatorKind::Debias1:
        case EstimatorKind::TheoDebias1:
            for (double z : zeta_grid)
                for (double p : p_grid) points.push_back({{z}, {p}, 0.0});
            break;
        case EstimatorKind::Debias2:
        case EstimatorKind::TheoDebias2:
            for (double z1 : zeta_grid)
                for (double z2 : zeta_grid)
                    for (double p1 : p_grid)
                        for (double p2 : p_grid)
                            points.push_back({{z1, z2}, {p1, p2}, 0.0});
            break;
        default:
            points.push_back({{}, {}, 0.0});  // nothing to tune
            break;
    }
    return points;
}

EstimatorSetup apply_point(const EstimatorSetup& base, const GridPoint& pt) {
    EstimatorSetup setup = base;
    if (base.kind == EstimatorKind::CfDebias) {
        if (!pt.zeta.empty()) setup.config.cf.lambda = pt.zeta[0];
        if (!pt.p.empty()) setup.config.cf.p = pt.p[0];
    } else if (!pt.zeta.empty()) {
        setup.config.zeta = pt.zeta;
        setup.config.p_scalers = pt.p;
    }
    return setup;
}

double path_mse(const std::vector<double>& est, const std::vector<double>& truth) {
    double acc = 0.0;
    long cnt = 0;
    for (std::size_t gi = 0; gi < est.size(); ++gi) {
        if (std::isnan(est[gi])) continue;
        const double err = est[gi] - truth[gi];
        acc += err * err;
        ++cnt;
    }
    return cnt > 0 ? acc / static_cast<double>(cnt)
                   : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<GridSearchResult> grid_search(const ExperimentConfig& config,
                                          const std::vector<double>& zeta_grid,
                                          const std::vector<double>& p_grid,
                                          const std::vector<double>& lambda_grid,
                                          int pilot_paths, bool independent_pilot) {
    config.validate();
    if (pilot_paths < 1) throw std::invalid_argument("grid_search needs pilot_paths >= 1");
    if (zeta_grid.empty() || p_grid.empty() || lambda_grid.empty())
        throw std::invalid_argument("grid_search needs nonempty grids");
    const std::vector<long> grid = tau_grid(config.model.n_steps);

    std::vector<GridSearchResult> results;
    for (const EstimatorSetup& base : config.estimators) {
        std::vector<GridPoint> points = enumerate_grid(base, zeta_grid, p_grid, lambda_grid);
        std::vector<std::vector<double>> mse(points.size(),
                                             std::vector<double>(pilot_paths, 0.0));

        parallel_for(pilot_paths, config.workers, [&](long j) {
            if (!independent_pilot) {
                // Common random numbers: all grid points see path j and share
                // its workspaces (the kernel prefix sums are tuning-free).
                const PathSample path = simulate_path(config.model, config.master_seed,
                                                      static_cast<std::uint64_t>(j));
                std::vector<double> truth(grid.size());
                for (std::size_t gi = 0; gi < grid.size(); ++gi)
                    truth[gi] = path.v[grid[gi]];
                PathEvaluator evaluator(path, grid);
                FlagTally scratch;
                for (std::size_t pi = 0; pi < points.size(); ++pi) {
                    const std::vector<double> est =
                        evaluator.evaluate(apply_point(base, points[pi]), scratch);
                    mse[pi][j] = path_mse(est, truth);
                }
            } else {
                for (std::size_t pi = 0; pi < points.size(); ++pi) {
                    const std::uint64_t stream =
                        static_cast<std::uint64_t>(j) + (static_cast<std::uint64_t>(pi) << 24);
                    const PathSample path =
                        simulate_path(config.model, config.master_seed, stream);
                    std::vector<double> truth(grid.size());
                    for (std::size_t gi = 0; gi < grid.size(); ++gi)
                        truth[gi] = path.v[grid[gi]];
                    PathEvaluator evaluator(path, grid);
                    FlagTally scratch;
                    const std::vector<double> est =
                        evaluator.evaluate(apply_point(base, points[pi]), scratch);
                    mse[pi][j] = path_mse(est, truth);
                }
            }
        });

        GridSearchResult res;
        res.estimator = base.name;
        res.surface = std::move(points);
        std::size_t best = 0;
        for (std::size_t pi = 0; pi < res.surface.size(); ++pi) {
            double acc = 0.0;
            for (int j = 0; j < pilot_paths; ++j) acc += mse[pi][j];
            res.surface[pi].rmse = std::sqrt(acc / pilot_paths);
            if (res.surface[pi].rmse < res.surface[best].rmse) best = pi;
        }
        res.best = res.surface[best];
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace spotvol
