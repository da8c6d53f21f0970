#include "spotvol/stable.hpp"

#include <cmath>
#include <stdexcept>

namespace spotvol {

static void check_stable_args(double y, double scale, double dt) {
    if (!(y > 0.0) || !(y < 2.0))
        throw std::domain_error("stable_increments: y must lie in (0, 2)");
    if (!(dt > 0.0))
        throw std::domain_error("stable_increments: dt must be positive");
    if (scale < 0.0)
        throw std::domain_error("stable_increments: scale must be nonnegative");
}

double stable_increment(double y, double scale, double dt, RngStream& stream) {
    check_stable_args(y, scale, dt);
    if (scale == 0.0) return 0.0;
    return std::pow(dt, 1.0 / y) * scale * stream.stable_standard(y);
}

std::vector<double> stable_increments(double y, double scale, double dt,
                                      std::size_t count, RngStream& stream) {
    check_stable_args(y, scale, dt);
    std::vector<double> out(count, 0.0);
    if (scale == 0.0) return out;
    const double amp = std::pow(dt, 1.0 / y) * scale;
    for (auto& x : out) x = amp * stream.stable_standard(y);
    return out;
}

}  // namespace spotvol
