#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "spotvol/rng.hpp"

namespace spotvol {

// One simulated market design: Heston variance, correlated Brownian drivers,
// constant drift, and a symmetric stable jump component (optionally capped
// per increment).
struct ModelSpec {
    double x0 = 0.0;        // initial log-price
    double v0 = 0.0;        // initial spot variance
    double drift_b = 0.0;   // constant drift rate
    double kappa = 0.0;     // mean-reversion speed (1/time)
    double theta = 0.0;     // long-run variance
    double xi = 0.0;        // vol-of-vol
    double rho = 0.0;       // corr(W, B), in [-1, 1]
    double jump_y = 1.5;    // stability index, in (0, 2)
    double jump_scale = 0.0;                 // stable scale, >= 0
    std::optional<double> jump_cap;          // per-increment cap J ^ cap
    double horizon_t = 1.0;                  // time span
    long n_steps = 0;                        // number of increments

    double dt() const { return horizon_t / static_cast<double>(n_steps); }

    // Throws std::invalid_argument listing every violated invariant.
    void validate() const;
};

// One simulated path on the even grid t_i = i * dt. All vectors have
// n_steps + 1 entries; v[i] >= 0. Immutable after construction and safe to
// hand to other threads.
struct PathSample {
    std::vector<double> times;
    std::vector<double> x;  // observed log-price
    std::vector<double> v;  // latent spot variance
    std::uint64_t seed = 0;

    long n_increments() const { return static_cast<long>(x.size()) - 1; }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    double increment(long i) const { return x[i] - x[i - 1]; }  // i in [1, n]
};

// Euler scheme with full truncation: V^+ enters both the drift and the
// diffusion, and the stored variance is max(V, 0). The log-price advances by
// drift_b*dt + sqrt(V^+_{i-1}) dW_i plus the (possibly capped) jump. dW and
// dB are jointly Gaussian with correlation rho and variance dt each.
PathSample simulate_path(const ModelSpec& model, RngStream& stream);

// Convenience: derives the per-path stream from (master_seed, path_index) so
// serial and parallel runs agree.
PathSample simulate_path(const ModelSpec& model, std::uint64_t master_seed,
                         std::uint64_t path_index);

// CSV with header "t,x,v", full precision.
void write_path_csv(const PathSample& path, std::ostream& out);
PathSample read_path_csv(std::istream& in);

}  // namespace spotvol
