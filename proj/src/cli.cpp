#include "spotvol/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "spotvol/config.hpp"
#include "spotvol/report.hpp"
#include "spotvol/theory.hpp"

namespace spotvol {

namespace {

namespace fs = std::filesystem;

struct Assertion {
    std::string metric;  // rmse | are | re
    std::string estimator;
    std::string op;  // <= >= < >
    double value = 0.0;
};

Assertion parse_assertion(const std::string& expr) {
    // form: metric(name)op value, e.g. rmse(debias2_exp)<=0.14
    const auto open = expr.find('(');
    const auto close = expr.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("bad --assert expression (want metric(name)<op><value>): " + expr);
    Assertion a;
    a.metric = expr.substr(0, open);
    a.estimator = expr.substr(open + 1, close - open - 1);
    std::string rest = expr.substr(close + 1);
    for (const char* op : {"<=", ">=", "<", ">"}) {
        if (rest.rfind(op, 0) == 0) {
            a.op = op;
            rest = rest.substr(a.op.size());
            break;
        }
    }
    if (a.op.empty()) throw ConfigError("bad --assert operator in: " + expr);
    if (a.metric != "rmse" && a.metric != "are" && a.metric != "re")
        throw ConfigError("--assert metric must be rmse, are or re: " + expr);
    try {
        a.value = std::stod(rest);
    } catch (const std::exception&) {
        throw ConfigError("bad --assert threshold in: " + expr);
    }
    return a;
}

bool check_assertion(const Assertion& a, const ExperimentReport& report, std::string& msg) {
    for (const EstimatorMetrics& m : report.estimators) {
        if (m.name != a.estimator) continue;
        const double lhs = a.metric == "rmse" ? m.rmse : a.metric == "are" ? m.are : m.re;
        bool ok = false;
        if (a.op == "<=") ok = lhs <= a.value;
        else if (a.op == ">=") ok = lhs >= a.value;
        else if (a.op == "<") ok = lhs < a.value;
        else ok = lhs > a.value;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s(%s) = %.6g %s %.6g : %s", a.metric.c_str(),
                      a.estimator.c_str(), lhs, a.op.c_str(), a.value,
                      ok ? "pass" : "FAIL");
        msg = buf;
        return ok;
    }
    msg = "assertion names unknown estimator '" + a.estimator + "'";
    return false;
}

// Shared options resolving to a full experiment config.
struct ConfigArgs {
    std::string preset;
    std::string config_path;
    double y = 1.6;
    long n_steps = 0;
    std::optional<int> n_paths;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "named preset: liu2018 or realistic");
        cmd->add_option("--config", config_path, "config file (key = value sections)");
        cmd->add_option("--y", y, "jump activity index for presets")
            ->check(CLI::Range(1e-9, 2.0 - 1e-9));
        cmd->add_option("--n", n_steps, "override the preset's number of increments");
        n_paths_opt = cmd->add_option("--M", "number of Monte Carlo paths");
        seed_opt = cmd->add_option("--seed", "master seed");
        workers_opt = cmd->add_option("--workers", "worker threads (0 = all cores)");
        cmd->add_option("--set", overrides,
                        "override section.key=value (repeatable)");
    }

    ExperimentConfig resolve() {
        if (preset.empty() && config_path.empty())
            throw ConfigError("need --preset or --config");
        if (!preset.empty() && !config_path.empty())
            throw ConfigError("--preset and --config are mutually exclusive");
        ExperimentConfig config = preset.empty() ? load_config_file(config_path)
                                                 : preset_config(preset, y, n_steps);
        if (n_paths_opt->count()) config.n_paths = n_paths_opt->as<int>();
        if (seed_opt->count()) config.master_seed = seed_opt->as<std::uint64_t>();
        if (workers_opt->count()) config.workers = workers_opt->as<int>();
        for (const std::string& o : overrides) apply_override(config, o);
        config.validate();
        return config;
    }

    CLI::Option* n_paths_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int run_experiment_cmd(ConfigArgs& args, const std::string& out_dir,
                       const std::vector<std::string>& assert_exprs) {
    ExperimentConfig config = args.resolve();
    std::vector<Assertion> assertions;
    for (const auto& expr : assert_exprs) assertions.push_back(parse_assertion(expr));

    const ExperimentReport report = run_experiment(config);
    const std::string config_text = render_config_text(config);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "report.json", report_to_json(report, config_text));
        write_file(fs::path(out_dir) / "summary.csv", report_summary_csv(report));
        write_file(fs::path(out_dir) / "resolved.cfg", config_text);
    }
    std::cout << report_summary_csv(report);
    std::fprintf(stderr, "experiment: %d paths in %.2f s\n", report.n_paths,
                 report.wall_seconds);

    bool all_ok = true;
    for (const Assertion& a : assertions) {
        std::string msg;
        const bool ok = check_assertion(a, report, msg);
        std::cout << "assert " << msg << "\n";
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 3;
}

int run_simulate_cmd(ConfigArgs& args, const std::string& out_dir, int paths) {
    ExperimentConfig config = args.resolve();
    fs::create_directories(out_dir.empty() ? "." : out_dir);
    const fs::path dir = out_dir.empty() ? "." : out_dir;
    for (int j = 0; j < paths; ++j) {
        const PathSample path = simulate_path(config.model, config.master_seed,
                                              static_cast<std::uint64_t>(j));
        char name[64];
        std::snprintf(name, sizeof(name), "path_%04d.csv", j);
        std::ofstream out(dir / name, std::ios::binary);
        write_path_csv(path, out);
        std::cout << (dir / name).string() << "\n";
    }
    return 0;
}

std::string flags_token(const SpotDiagnostics& d) {
    std::string s;
    auto add = [&s](const char* t) {
        if (!s.empty()) s += "|";
        s += t;
    };
    if (d.guard_fired) add("guard");
    if (d.clamp_a_fired) add("clamp_a");
    if (d.clamp_corr_fired) add("clamp_corr");
    if (d.negative_value) add("neg");
    if (d.clamped_to_zero) add("clamp0");
    return s;
}

int run_estimate_cmd(ConfigArgs& args, const std::string& path_file,
                     const std::string& out_dir, const std::string& only) {
    ExperimentConfig config = args.resolve();
    std::ifstream in(path_file);
    if (!in) throw ConfigError("cannot open path file: " + path_file);
    const PathSample path = read_path_csv(in);
    const std::vector<long> grid = tau_grid(path.n_increments());
    const double dt = path.dt();
    const double bv = bipower_variation(path);

    std::ostringstream csv, diag_json;
    csv << "estimator,tau,stage,value,flags\n";
    diag_json << "{\n  \"bipower_variation\": " << format_g17(bv) << ",\n  \"estimators\": [";
    bool first_est = true;
    for (const EstimatorSetup& setup : config.estimators) {
        if (!only.empty() && setup.name != only) continue;
        diag_json << (first_est ? "\n" : ",\n");
        first_est = false;
        diag_json << "    {\"name\": \"" << json_escape(setup.name) << "\", \"taus\": [";
        bool first_tau = true;
        if (setup.is_cf()) {
            const double h = std::pow(dt, setup.config.cf.h_exponent);
            const double u = std::pow(dt, setup.config.cf.u_exponent) / std::sqrt(bv);
            CfWorkspace ws(path, setup.config.kernel, h);
            for (long idx : grid) {
                const double tau = static_cast<double>(idx) * dt;
                SpotDiagnostics d;
                const double val =
                    setup.kind == EstimatorKind::Cf
                        ? ws.spot_vol(tau, u)
                        : ws.debiased(tau, u, setup.config.cf.lambda, setup.config.cf.p,
                                      setup.config.m_rule.multiplier(dt), &d);
                csv << setup.name << "," << format_g17(tau) << ",0," << format_g17(val)
                    << "," << flags_token(d) << "\n";
                diag_json << (first_tau ? "" : ",") << format_g17(tau);
                first_tau = false;
            }
        } else {
            SpotVolWorkspace ws(path, setup.config.kernel,
                                setup.config.m_rule.multiplier(dt));
            const double v = threshold_v(bv, dt, setup.config.v_rule);
            PracticalDebiaser deb(ws, setup.config.zeta, setup.config.p_scalers);
            for (long idx : grid) {
                const double tau = static_cast<double>(idx) * dt;
                SpotEstimate est;
                switch (setup.kind) {
                    case EstimatorKind::Trunc:
                        est.tau = tau;
                        est.value = ws.stage0_value(tau, v);
                        break;
                    case EstimatorKind::Debias1:
                    case EstimatorKind::Debias2:
                        est = deb.evaluate(tau, v, setup.stage());
                        break;
                    case EstimatorKind::TheoDebias1:
                    case EstimatorKind::TheoDebias2:
                        est = eval_theoretical(ws, tau, v, setup.config.zeta, setup.stage());
                        break;
                    default: break;
                }
                csv << setup.name << "," << format_g17(tau) << "," << est.stage << ","
                    << format_g17(est.value) << "," << flags_token(est.diag) << "\n";
                diag_json << (first_tau ? "" : ",") << format_g17(tau);
                first_tau = false;
            }
        }
        diag_json << "]}";
    }
    diag_json << "\n  ]\n}\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "estimates.csv", csv.str());
        write_file(fs::path(out_dir) / "diagnostics.json", diag_json.str());
    }
    std::cout << csv.str();
    return 0;
}

std::vector<double> parse_grid(const std::string& spec) {
    // "lo:step:hi" or comma-separated values
    if (spec.find(':') != std::string::npos) {
        double lo, step, hi;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 || step <= 0)
            throw ConfigError("bad grid spec (want lo:step:hi): " + spec);
        std::vector<double> g;
        for (double x = lo; x <= hi + 1e-12; x += step) g.push_back(x);
        return g;
    }
    std::vector<double> g;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) g.push_back(std::stod(item));
    if (g.empty()) throw ConfigError("empty grid spec: " + spec);
    return g;
}

int run_gridsearch_cmd(ConfigArgs& args, const std::string& out_dir,
                       const std::string& only, int pilot_paths, bool independent,
                       const std::string& zeta_spec, const std::string& p_spec,
                       const std::string& lambda_spec) {
    ExperimentConfig config = args.resolve();
    if (!only.empty()) {
        std::vector<EstimatorSetup> keep;
        for (const auto& e : config.estimators)
            if (e.name == only) keep.push_back(e);
        if (keep.empty()) throw ConfigError("gridsearch: unknown estimator '" + only + "'");
        config.estimators = keep;
    }
    const auto zg = zeta_spec.empty() ? default_zeta_grid() : parse_grid(zeta_spec);
    const auto pg = p_spec.empty() ? default_p_grid() : parse_grid(p_spec);
    const auto lg = lambda_spec.empty() ? default_zeta_grid() : parse_grid(lambda_spec);

    const auto results = grid_search(config, zg, pg, lg, pilot_paths, independent);
    std::ostringstream csv;
    csv << "estimator,zeta,p,rmse\n";
    auto tuple_str = [](const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i)
            s += (i ? ";" : "") + format_g5(xs[i]);
        return s.empty() ? "-" : s;
    };
    for (const auto& r : results) {
        for (const auto& pt : r.surface)
            csv << r.estimator << "," << tuple_str(pt.zeta) << "," << tuple_str(pt.p)
                << "," << format_g17(pt.rmse) << "\n";
        std::cout << "best " << r.estimator << ": zeta=" << tuple_str(r.best.zeta)
                  << " p=" << tuple_str(r.best.p) << " rmse=" << format_g5(r.best.rmse)
                  << "\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "gridsearch.csv", csv.str());
    }
    return 0;
}

int run_validate_kernel_cmd(const std::string& kernel_name) {
    Kernel kernel = kernel_name.rfind("custom:", 0) == 0
                        ? load_kernel_csv(kernel_name.substr(7))
                        : kernel_by_name(kernel_name);
    const KernelValidation report = validate_kernel(kernel);
    std::printf("kernel %s\n", kernel.name().c_str());
    for (const KernelCheck& c : report.checks)
        std::printf("  %-14s %-4s residual=%.3e  (%s)\n", c.name.c_str(),
                    c.passed ? "ok" : "FAIL", c.residual, c.detail.c_str());
    std::printf("functionals: intK2=%.9g intL2=%.9g L(0+)=%.9g\n",
                k_squared_integral(kernel), l_squared_integral(kernel),
                l_function(kernel, 0.0));
    return 0;
}

int run_oracle_cmd(int p, double y, double dt, double sigma, double scale, double chi,
                   double v_in, double zeta, std::size_t draws, std::uint64_t seed) {
    JumpActivityParams params;
    params.y = y;
    params.c_plus = params.c_minus = stable_scale_to_levy_constant(scale, y);
    params.chi = chi;
    params.sigma2 = sigma * sigma;
    const double v = v_in > 0.0 ? v_in : std::pow(dt, 5.0 / 12.0);

    RngStream stream = RngStream::substream(seed, 0);
    const double expansion = truncated_moment_expansion(p, params, dt, v);
    const OracleResult mc = mc_truncated_moment_oracle(p, params, dt, v, draws, stream);
    const double dev = std::abs(expansion - mc.estimate) / mc.std_error;
    std::printf("truncated moment p=%d y=%g dt=%g v=%g: expansion=%.8e mc=%.8e se=%.2e |diff|=%.2f se\n",
                p, y, dt, v, expansion, mc.estimate, mc.std_error, dev);
    if (p == 1 && zeta > 1.0) {
        RngStream stream2 = RngStream::substream(seed, 1);
        const double diff_exp = truncated_moment_difference(params, dt, v, zeta);
        const OracleResult mc2 =
            mc_truncated_moment_difference_oracle(params, dt, v, zeta, draws, stream2);
        const double dev2 = std::abs(diff_exp - mc2.estimate) / mc2.std_error;
        std::printf("difference form zeta=%g: expansion=%.8e mc=%.8e se=%.2e |diff|=%.2f se\n",
                    zeta, diff_exp, mc2.estimate, mc2.std_error, dev2);
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Truncated kernel spot-volatility estimation and Monte Carlo harness"};
    app.require_subcommand(1);

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    ConfigArgs exp_args;
    exp_args.attach(exp_cmd);
    std::string exp_out;
    std::vector<std::string> assert_exprs;
    exp_cmd->add_option("--out", exp_out, "output directory (report.json, summary.csv, resolved.cfg)");
    exp_cmd->add_option("--assert", assert_exprs,
                        "metric(name)<op><value>, e.g. rmse(debias2_exp)<=0.14; exit 3 on failure");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "write simulated paths as CSV");
    ConfigArgs sim_args;
    sim_args.attach(sim_cmd);
    std::string sim_out;
    int sim_paths = 1;
    sim_cmd->add_option("--out", sim_out, "output directory");
    sim_cmd->add_option("--paths", sim_paths, "number of paths")->check(CLI::PositiveNumber);

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "evaluate estimators on a stored path");
    ConfigArgs est_args;
    est_args.attach(est_cmd);
    std::string est_path, est_out, est_only;
    est_cmd->add_option("--path", est_path, "path CSV (t,x,v)")->required();
    est_cmd->add_option("--out", est_out, "output directory");
    est_cmd->add_option("--estimator", est_only, "restrict to one configured estimator");

    // gridsearch
    auto* gs_cmd = app.add_subcommand("gridsearch", "exhaustive tuning search");
    ConfigArgs gs_args;
    gs_args.attach(gs_cmd);
    std::string gs_out, gs_only, gs_zeta, gs_p, gs_lambda;
    int gs_pilot = 100;
    bool gs_independent = false;
    gs_cmd->add_option("--out", gs_out, "output directory");
    gs_cmd->add_option("--estimator", gs_only, "restrict to one configured estimator");
    gs_cmd->add_option("--pilot-M", gs_pilot, "pilot replications per grid point");
    gs_cmd->add_flag("--independent-pilot", gs_independent,
                     "resimulate paths per grid point instead of common random numbers");
    gs_cmd->add_option("--zeta-grid", gs_zeta, "lo:step:hi or comma list (default 1.1:0.05:1.9)");
    gs_cmd->add_option("--p-grid", gs_p, "lo:step:hi or comma list (default 0.1:0.05:0.9)");
    gs_cmd->add_option("--lambda-grid", gs_lambda, "lo:step:hi or comma list");

    // validate-kernel
    auto* vk_cmd = app.add_subcommand("validate-kernel", "check kernel conditions numerically");
    std::string vk_kernel = "exponential";
    vk_cmd->add_option("--kernel", vk_kernel, "exponential | uniform2 | quartic_k3 | custom:<csv>");

    // oracle
    auto* or_cmd = app.add_subcommand("oracle", "truncated-moment expansion vs Monte Carlo");
    int or_p = 1;
    double or_y = 1.5, or_dt = 1e-4, or_sigma = 0.4, or_scale = 0.5, or_chi = 1.0;
    double or_v = 0.0, or_zeta = 1.5;
    double or_draws = 1e6;
    std::uint64_t or_seed = 1;
    or_cmd->add_option("--p", or_p, "moment order (2p)");
    or_cmd->add_option("--y", or_y, "jump activity index");
    or_cmd->add_option("--dt", or_dt, "time step");
    or_cmd->add_option("--sigma", or_sigma, "spot volatility");
    or_cmd->add_option("--scale", or_scale, "stable scale parameter");
    or_cmd->add_option("--chi", or_chi, "jump multiplier");
    or_cmd->add_option("--v", or_v, "threshold (default dt^{5/12})");
    or_cmd->add_option("--zeta", or_zeta, "difference-form ratio (p=1 only)");
    or_cmd->add_option("--draws", or_draws, "Monte Carlo draws");
    or_cmd->add_option("--seed", or_seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (exp_cmd->parsed()) return run_experiment_cmd(exp_args, exp_out, assert_exprs);
        if (sim_cmd->parsed()) return run_simulate_cmd(sim_args, sim_out, sim_paths);
        if (est_cmd->parsed()) return run_estimate_cmd(est_args, est_path, est_out, est_only);
        if (gs_cmd->parsed())
            return run_gridsearch_cmd(gs_args, gs_out, gs_only, gs_pilot, gs_independent,
                                      gs_zeta, gs_p, gs_lambda);
        if (vk_cmd->parsed()) return run_validate_kernel_cmd(vk_kernel);
        if (or_cmd->parsed())
            return run_oracle_cmd(or_p, or_y, or_dt, or_sigma, or_scale, or_chi, or_v,
                                  or_zeta, static_cast<std::size_t>(or_draws), or_seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace spotvol
