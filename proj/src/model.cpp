#include "spotvol/model.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "spotvol/stable.hpp"

namespace spotvol {

void ModelSpec::validate() const {
    std::string err;
    auto fail = [&err](const std::string& msg) {
        if (!err.empty()) err += "; ";
        err += msg;
    };
    if (!(kappa >= 0.0)) fail("kappa must be >= 0");
    if (!(theta >= 0.0)) fail("theta must be >= 0");
    if (!(xi >= 0.0)) fail("xi must be >= 0");
    if (!(v0 >= 0.0)) fail("v0 must be >= 0");
    if (!(std::abs(rho) <= 1.0)) fail("|rho| must be <= 1");
    if (!(jump_y > 0.0 && jump_y < 2.0)) fail("jump_y must lie in (0, 2)");
    if (!(jump_scale >= 0.0)) fail("jump_scale must be >= 0");
    if (jump_cap && !(*jump_cap > 0.0)) fail("jump_cap must be > 0 when present");
    if (n_steps < 2) fail("n_steps must be >= 2");
    if (!(horizon_t > 0.0)) fail("horizon_T must be > 0");
    if (err.empty() && !(dt() > 0.0)) fail("dt must be > 0");
    if (!err.empty()) throw std::invalid_argument("ModelSpec: " + err);
}

PathSample simulate_path(const ModelSpec& model, RngStream& stream) {
    model.validate();
    const long n = model.n_steps;
    const double dt = model.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double rho = model.rho;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const bool jumps = model.jump_scale > 0.0;
    const double jump_amp = jumps ? std::pow(dt, 1.0 / model.jump_y) * model.jump_scale : 0.0;

    PathSample path;
    path.times.resize(n + 1);
    path.x.resize(n + 1);
    path.v.resize(n + 1);
    for (long i = 0; i <= n; ++i) path.times[i] = static_cast<double>(i) * dt;
    path.x[0] = model.x0;
    path.v[0] = model.v0;

    for (long i = 1; i <= n; ++i) {
        const double z1 = stream.normal();
        const double z2 = stream.normal();
        const double dw = sqrt_dt * z1;
        const double db = sqrt_dt * (rho * z1 + rho_c * z2);
        const double v_prev = path.v[i - 1];
        const double sv = std::sqrt(v_prev);

        double jump = 0.0;
        if (jumps) {
            jump = jump_amp * stream.stable_standard(model.jump_y);
            if (model.jump_cap) jump = std::min(jump, *model.jump_cap);
        }
        path.x[i] = path.x[i - 1] + model.drift_b * dt + sv * dw + jump;

        const double v_next = v_prev + model.kappa * (model.theta - v_prev) * dt + model.xi * sv * db;
        path.v[i] = std::max(v_next, 0.0);
    }
    return path;
}

PathSample simulate_path(const ModelSpec& model, std::uint64_t master_seed,
                         std::uint64_t path_index) {
    RngStream stream = RngStream::substream(master_seed, path_index);
    PathSample path = simulate_path(model, stream);
    path.seed = master_seed;
    return path;
}

void write_path_csv(const PathSample& path, std::ostream& out) {
    out << "t,x,v\n";
    char buf[96];
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", path.times[i],
                      path.x[i], path.v[i]);
        out << buf;
    }
}

PathSample read_path_csv(std::istream& in) {
    PathSample path;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t, x, v;
        if (row >> t >> x >> v) {
            path.times.push_back(t);
            path.x.push_back(x);
            path.v.push_back(v);
        }
    }
    if (path.times.size() < 3)
        throw std::runtime_error("path CSV needs at least 3 rows of t,x,v");
    return path;
}

}  // namespace spotvol
