#pragma once

#include <cstdint>
#include <random>

namespace spotvol {

// Deterministic random stream. Every draw is derived from raw mt19937_64
// output, so sequences are bit-identical across platforms and standard
// library implementations (std::*_distribution is implementation-defined
// and is deliberately avoided).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    // Independent stream for a (master seed, stream index) pair. Distinct
    // indices give statistically independent streams, which lets paths be
    // generated in parallel in any order with a reproducible result.
    static RngStream substream(std::uint64_t master_seed, std::uint64_t index);

    // Uniform on the open interval (0, 1).
    double uniform_open();

    // Standard normal via Box-Muller.
    double normal();

    // Unit-mean exponential.
    double exponential();

    // Standard symmetric alpha-stable draw, characteristic function
    // exp(-|u|^alpha), via the Chambers-Mallows-Stuck transform.
    // Requires alpha in (0, 2).
    double stable_standard(double alpha);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 step, used for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace spotvol
