#pragma once

#include "geofuse/geom/types.hpp"

namespace geofuse::predicates {

/// Sign of det[b-a; c-a] for 2D points: +1 when a, b, c turn
/// counter-clockwise. Exact.
int orient2d(double ax, double ay, double bx, double by, double cx, double cy);

/// Sign of det[b-a; c-a; d-a]. Exact: a static floating-point filter with
/// an expansion-arithmetic fallback.
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// +1 when e lies strictly inside the circumsphere of a, b, c, d, 0 on it,
/// -1 outside. Exact. Throws Error when a, b, c, d are coplanar.
int in_sphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

/// in_sphere for a tetrahedron already known to satisfy orient3d > 0.
int in_sphere_oriented(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

/// orient3d(p, x, y, z) with p symbolically displaced by
/// eps*e_x + eps^2*e_y + eps^3*e_z. Returns 0 only when x, y, z are
/// collinear and the unperturbed sign is 0.
int orient3d_perturbed_first(const Vec3& p, const Vec3& x, const Vec3& y, const Vec3& z);

/// Counters for how often the exact fallback ran (diagnostics only).
struct FallbackStats {
  std::uint64_t orient3d = 0;
  std::uint64_t in_sphere = 0;
};
FallbackStats fallback_stats();

}  // namespace geofuse::predicates
