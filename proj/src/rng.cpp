#include "spotvol/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spotvol {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    engine_.seed(seq);
}

RngStream RngStream::substream(std::uint64_t master_seed, std::uint64_t index) {
    // Mix the index through SplitMix64 before combining so that adjacent
    // indices land far apart in seed space.
    std::uint64_t s = index + 0x632BE59BD9B4E019ULL;
    std::uint64_t mixed = splitmix64(s);
    return RngStream(master_seed ^ mixed);
}

double RngStream::uniform_open() {
    // 53-bit mantissa, shifted off zero: values in (0, 1) exclusive.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential() {
    return -std::log(uniform_open());
}

double RngStream::stable_standard(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw std::domain_error("stable_standard: alpha must lie in (0, 2)");
    const double u = std::numbers::pi * (uniform_open() - 0.5);  // (-pi/2, pi/2)
    const double w = exponential();
    if (alpha == 1.0)
        return std::tan(u);  // symmetric Cauchy limit of the CMS transform
    const double s = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
    const double t = std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    return s * t;
}

}  // namespace spotvol
