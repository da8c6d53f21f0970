#pragma once

#include <vector>

#include "spotvol/rng.hpp"

namespace spotvol {

// Increments over time step dt of a symmetric strictly y-stable Levy process
// with scale parameter `scale`, under the convention that a unit-time
// increment has characteristic function exp(-scale^y |u|^y). Each draw
// equals dt^{1/y} * scale * S with S standard symmetric y-stable.
//
// Throws std::domain_error if y is outside (0, 2) or dt <= 0.
std::vector<double> stable_increments(double y, double scale, double dt,
                                      std::size_t count, RngStream& stream);

// Single increment, same convention.
double stable_increment(double y, double scale, double dt, RngStream& stream);

}  // namespace spotvol
