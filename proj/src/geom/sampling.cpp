#include "geofuse/geom/sampling.hpp"

#include <cmath>
#include <numbers>

namespace geofuse {

std::vector<Vec3> fibonacci_directions(std::size_t n) {
  if (n == 0) throw Error("fibonacci_directions needs at least one direction");
  std::vector<Vec3> dirs(n);
  const double count = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = static_cast<double>(i);
    const double z = 1.0 - 2.0 * (fi + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * fi / std::numbers::phi;
    dirs[i] = Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized();
  }
  return dirs;
}

}  // namespace geofuse
