#pragma once

#include "geofuse/geom/types.hpp"

namespace geofuse {

/// Quickhull with exact orientation tests. Faces index the input points and
/// are oriented outward. Points coplanar with a hull face are not hull
/// vertices. Throws Error when the points are coplanar or collinear.
std::vector<Face> convex_hull_faces(const std::vector<Vec3>& points);

/// Hull as a compact mesh holding only the hull vertices (in input order).
TriangleMesh convex_hull3(const std::vector<Vec3>& points);

}  // namespace geofuse
