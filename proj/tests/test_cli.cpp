#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spotvol/cli.hpp"
#include "spotvol/config.hpp"
#include "spotvol/report.hpp"

using namespace spotvol;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"spotvol"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kSmallConfig = R"(# compact test design
[model]
x0 = 0
v0 = 0.25
drift_b = 0
kappa = 3
theta = 0.25
xi = 0.4
rho = -0.3
jump_y = 1.5
jump_scale = 0.2
horizon_T = 1
n_steps = 400

[experiment]
M = 4
master_seed = 11

[estimator.trunc_exp]
kind = trunc
kernel = exponential
m_rule = pow:0.5
v_rule = bv_pow:0.41666666666666669

[estimator.debias1_exp]
kind = debias1
kernel = exponential
zeta = 1.7
p = 0.6
)";

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing round-trips through render") {
    const ExperimentConfig c = parse_config_text(kSmallConfig);
    CHECK(c.model.n_steps == 400);
    CHECK(c.estimators.size() == 2);
    CHECK(c.estimators[1].config.zeta == std::vector<double>{1.7});
    const std::string rendered = render_config_text(c);
    const ExperimentConfig c2 = parse_config_text(rendered);
    CHECK(render_config_text(c2) == rendered);
}

TEST_CASE("unknown keys report the nearest valid name") {
    try {
        parse_config_text("[model]\nkapa = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("kapa") != std::string::npos);
        CHECK(msg.find("kappa") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[nonsense]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[model]\nkappa : 3\n"), ConfigError);
}

TEST_CASE("overrides reach into sections and estimators") {
    ExperimentConfig c = parse_config_text(kSmallConfig);
    apply_override(c, "model.jump_y=1.75");
    apply_override(c, "experiment.M=9");
    apply_override(c, "estimator.debias1_exp.zeta=1.9");
    CHECK(c.model.jump_y == 1.75);
    CHECK(c.n_paths == 9);
    CHECK(c.estimators[1].config.zeta == std::vector<double>{1.9});
    CHECK_THROWS_AS(apply_override(c, "estimator.nope.zeta=1.5"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "badpath"), ConfigError);
}

TEST_CASE("presets resolve with tabulated tunings") {
    const ExperimentConfig c = preset_config("liu2018", 1.6);
    CHECK(c.model.n_steps == 8580);
    CHECK(c.estimators.size() == 8);
    bool found = false;
    for (const auto& e : c.estimators)
        if (e.name == "debias2_exp") {
            found = true;
            CHECK(e.config.zeta == std::vector<double>{1.9, 1.75});
            CHECK(e.config.p_scalers == std::vector<double>{0.7, 0.25});
        }
    CHECK(found);
    const ExperimentConfig r = preset_config("realistic", 1.75);
    CHECK(r.model.n_steps == 4914);
    CHECK(r.model.jump_cap.has_value());
    CHECK(r.model.horizon_t == doctest::Approx(0.25));
    CHECK_THROWS_AS(preset_config("nope", 1.6), ConfigError);
}

TEST_CASE("cli: experiment writes report, summary and resolved config") {
    TempDir dir("spotvol_cli_exp");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    const int rc = run_cli({"experiment", "--config", cfg.string(), "--out",
                            (dir.path / "out").string()});
    CHECK(rc == 0);
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    CHECK(fs::exists(dir.path / "out" / "summary.csv"));
    CHECK(fs::exists(dir.path / "out" / "resolved.cfg"));
}

TEST_CASE("cli: report round-trips byte-for-byte from its embedded config") {
    TempDir dir("spotvol_cli_roundtrip");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    REQUIRE(run_cli({"experiment", "--config", cfg.string(), "--out",
                     (dir.path / "a").string()}) == 0);
    const std::string report_a = slurp(dir.path / "a" / "report.json");

    // extract the embedded config and re-run from it
    const auto parsed = nlohmann::json::parse(report_a);
    const std::string embedded = parsed.at("config").get<std::string>();
    const fs::path cfg2 = dir.path / "resolved.cfg";
    std::ofstream(cfg2) << embedded;
    REQUIRE(run_cli({"experiment", "--config", cfg2.string(), "--out",
                     (dir.path / "b").string()}) == 0);
    CHECK(slurp(dir.path / "b" / "report.json") == report_a);
}

TEST_CASE("cli: assertion failures exit with code 3") {
    TempDir dir("spotvol_cli_assert");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    CHECK(run_cli({"experiment", "--config", cfg.string(), "--assert",
                   "rmse(trunc_exp)<=1000"}) == 0);
    CHECK(run_cli({"experiment", "--config", cfg.string(), "--assert",
                   "rmse(trunc_exp)<=0"}) == 3);
    CHECK(run_cli({"experiment", "--config", cfg.string(), "--assert",
                   "bogus(trunc_exp)<=0"}) == 2);
}

TEST_CASE("cli: config errors exit with code 2") {
    CHECK(run_cli({"experiment", "--config", "/nonexistent/file.cfg"}) == 2);
    CHECK(run_cli({"experiment"}) == 2);  // neither preset nor config
    TempDir dir("spotvol_cli_badcfg");
    const fs::path cfg = dir.path / "bad.cfg";
    std::ofstream(cfg) << "[model]\nkapa = 3\n";
    CHECK(run_cli({"experiment", "--config", cfg.string()}) == 2);
}

TEST_CASE("cli: simulate writes one CSV per path") {
    TempDir dir("spotvol_cli_sim");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    const int rc = run_cli({"simulate", "--config", cfg.string(), "--paths", "2",
                            "--out", dir.path.string()});
    CHECK(rc == 0);
    CHECK(fs::exists(dir.path / "path_0000.csv"));
    CHECK(fs::exists(dir.path / "path_0001.csv"));
    const std::string head = slurp(dir.path / "path_0000.csv").substr(0, 6);
    CHECK(head == "t,x,v\n");
}

TEST_CASE("cli: estimate emits tau,stage,value,flags rows") {
    TempDir dir("spotvol_cli_est");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--paths", "1", "--out",
                     dir.path.string()}) == 0);
    const int rc = run_cli({"estimate", "--config", cfg.string(), "--path",
                            (dir.path / "path_0000.csv").string(), "--out",
                            (dir.path / "est").string()});
    CHECK(rc == 0);
    const std::string csv = slurp(dir.path / "est" / "estimates.csv");
    CHECK(csv.find("estimator,tau,stage,value,flags") != std::string::npos);
    CHECK(csv.find("debias1_exp") != std::string::npos);
    CHECK(fs::exists(dir.path / "est" / "diagnostics.json"));
}

TEST_CASE("cli: validate-kernel and oracle run") {
    CHECK(run_cli({"validate-kernel", "--kernel", "quartic_k3"}) == 0);
    CHECK(run_cli({"oracle", "--p", "1", "--y", "1.5", "--dt", "1e-4", "--draws",
                   "20000"}) == 0);
}

TEST_CASE("cli: gridsearch on tiny grids") {
    TempDir dir("spotvol_cli_gs");
    const fs::path cfg = dir.path / "exp.cfg";
    std::ofstream(cfg) << kSmallConfig;
    const int rc = run_cli({"gridsearch", "--config", cfg.string(), "--estimator",
                            "debias1_exp", "--pilot-M", "3", "--zeta-grid", "1.5,1.8",
                            "--p-grid", "0.5", "--out", dir.path.string()});
    CHECK(rc == 0);
    const std::string csv = slurp(dir.path / "gridsearch.csv");
    CHECK(csv.find("estimator,zeta,p,rmse") != std::string::npos);
}
