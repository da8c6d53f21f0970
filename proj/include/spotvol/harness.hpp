#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spotvol/estimators.hpp"
#include "spotvol/model.hpp"

namespace spotvol {

enum class EstimatorKind {
    Trunc,            // stage-0 truncated kernel estimator
    Debias1,          // practical one-step debias
    Debias2,          // practical two-step debias
    TheoDebias1,      // recursion-form one-step debias
    TheoDebias2,      // recursion-form two-step debias
    Cf,               // characteristic-function estimator
    CfDebias,         // characteristic-function estimator with aggregation debias
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& s);

struct EstimatorSetup {
    std::string name;
    EstimatorKind kind = EstimatorKind::Trunc;
    EstimatorConfig config;

    int stage() const;
    bool is_cf() const { return kind == EstimatorKind::Cf || kind == EstimatorKind::CfDebias; }
    std::string tuning_string() const;
};

struct ExperimentConfig {
    ModelSpec model;
    std::vector<EstimatorSetup> estimators;
    int n_paths = 100;
    std::uint64_t master_seed = 1;
    double epsilon_truth = 1e-12;  // relative-error exclusion floor
    int workers = 0;               // 0 = hardware concurrency

    void validate() const;
};

struct FlagTally {
    long guard = 0;
    long clamp_a = 0;
    long clamp_corr = 0;
    long negative = 0;
    long clamped_to_zero = 0;
    long errors = 0;  // per-evaluation failures (excluded from metrics)
};

struct EstimatorMetrics {
    std::string name;
    std::string kind;
    std::string tuning;
    double rmse = 0.0;
    double are = 0.0;
    double re = 0.0;
    std::vector<double> mse_j;  // per path
    std::vector<double> ae_j;
    std::vector<double> e_j;
    long excluded_relative_points = 0;  // tau points with truth < epsilon
    FlagTally flags;
};

struct ExperimentReport {
    std::vector<long> tau_indices;
    std::vector<EstimatorMetrics> estimators;
    std::uint64_t master_seed = 0;
    int n_paths = 0;
    double wall_seconds = 0.0;  // never serialized into the report file
};

// Evaluation grid l_i = i * floor(n/100), i = 10..90 (81 points).
// Throws std::domain_error when n < 100.
std::vector<long> tau_grid(long n);

struct MetricsResult {
    double rmse = 0.0, are = 0.0, re = 0.0;
    std::vector<double> mse_j, ae_j, e_j;
    long excluded_relative_points = 0;
};

// Pathwise metrics over matching [path][tau-point] arrays. MSE averages all
// points; AE/E skip points whose truth is below epsilon_truth (the skipped
// count is reported) and average over the points that remain. NaN estimates
// (failed evaluations) are skipped everywhere.
MetricsResult compute_metrics(const std::vector<std::vector<double>>& estimates,
                              const std::vector<std::vector<double>>& truths,
                              double epsilon_truth);

// Simulates n_paths paths (stream j derived from (master_seed, j)), evaluates
// every estimator at every grid point, and aggregates. The reduction runs in
// path order, so the report is identical for any worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

// --- grid search ------------------------------------------------------------

struct GridPoint {
    std::vector<double> zeta;   // or {lambda} for cf
    std::vector<double> p;
    double rmse = 0.0;
};

struct GridSearchResult {
    std::string estimator;
    std::vector<GridPoint> surface;  // full RMSE surface, grid order
    GridPoint best;                  // argmin RMSE (first on ties)
};

// Exhaustive tuning search for every estimator in the config that has free
// tuning parameters (Debias1/2: zeta x p per stage; CfDebias: lambda x p).
// By default all grid points share one pilot path set (common random
// numbers); independent_pilot resimulates per point with streams derived from
// (master_seed, point index).
std::vector<GridSearchResult> grid_search(const ExperimentConfig& config,
                                          const std::vector<double>& zeta_grid,
                                          const std::vector<double>& p_grid,
                                          const std::vector<double>& lambda_grid,
                                          int pilot_paths,
                                          bool independent_pilot = false);

// Paper grids: 1.1:0.05:1.9 for zeta/lambda, 0.1:0.05:0.9 for p.
std::vector<double> default_zeta_grid();
std::vector<double> default_p_grid();

}  // namespace spotvol
