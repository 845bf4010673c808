#pragma once

#include "geofuse/geom/types.hpp"

namespace geofuse {

/// Fibonacci lattice on the unit sphere: z_i = 1 - 2(i + 0.5)/n and azimuth
/// 2*pi*i/golden_ratio. Deterministic; throws for n == 0.
std::vector<Vec3> fibonacci_directions(std::size_t n);

}  // namespace geofuse
