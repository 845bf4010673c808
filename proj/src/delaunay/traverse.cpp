#include "geofuse/delaunay/predicates.hpp"
#include "geofuse/delaunay/tet_complex.hpp"

#include <algorithm>

namespace geofuse {

namespace {

// Orientation of tet t with slot i replaced by the perturbed center. The
// other three vertices must be finite.
int perturbed_orient(const TetComplex& c, std::int32_t t, int i, const Vec3& center) {
  const Tet& tet = c.tet(t);
  std::array<const Vec3*, 3> rest{};
  int m = 0;
  for (int k = 0; k < 4; ++k)
    if (k != i) rest[static_cast<std::size_t>(m++)] = &c.point(tet.v[static_cast<std::size_t>(k)]);
  // Moving slot i to the front takes i adjacent transpositions.
  const int s = predicates::orient3d_perturbed_first(center, *rest[0], *rest[1], *rest[2]);
  return (i % 2 == 0) ? s : -s;
}

int slot_of(const Tet& tet, std::int32_t v) {
  for (int i = 0; i < 4; ++i)
    if (tet.v[static_cast<std::size_t>(i)] == v) return i;
  return -1;
}

// Finite tet of the star whose open cone at `target` contains the direction
// sign * (center - target), or an infinite tet whose hull facet the
// direction points beyond (sign > 0) or back from (sign < 0).
std::int32_t cone_tet(const TetComplex& c, const std::vector<std::int32_t>& star, std::int32_t target,
                      const Vec3& center, int sign) {
  for (const std::int32_t t : star) {
    if (c.is_infinite(t)) continue;
    const int i = slot_of(c.tet(t), target);
    bool inside = true;
    for (int j = 0; j < 4 && inside; ++j)
      if (j != i) inside = sign * perturbed_orient(c, t, j, center) > 0;
    if (inside) return t;
  }
  for (const std::int32_t t : star) {
    const int k = c.infinite_slot(t);
    if (k >= 0 && sign * perturbed_orient(c, t, k, center) > 0) return t;
  }
  throw Error("traverse_ray: no tet around the target matches the ray direction");
}

}  // namespace

TetTraversal traverse_ray(const TetComplex& c, std::int32_t target, const Vec3& center) {
  if (target < 0 || static_cast<std::size_t>(target) >= c.vertex_count())
    throw Error("traverse_ray: target is not a vertex of the complex");
  const Vec3& p = c.point(target);
  if (center == p) throw Error("traverse_ray: view center coincides with the target");

  const std::vector<std::int32_t> star = c.star(target);
  TetTraversal out;
  out.behind = cone_tet(c, star, target, center, -1);

  // Walk from the target toward the center, then reverse.
  std::vector<std::int32_t> walk{cone_tet(c, star, target, center, +1)};
  std::int32_t t = walk.back();
  if (!c.is_infinite(t)) {
    int exit_slot = slot_of(c.tet(t), target);
    const std::size_t cap = c.tet_count() + 1;
    while (true) {
      if (perturbed_orient(c, t, exit_slot, center) > 0) break;  // center inside t
      const std::int32_t next = c.tet(t).n[static_cast<std::size_t>(exit_slot)];
      const int entry = c.mirror_slot(t, exit_slot);
      walk.push_back(next);
      t = next;
      if (c.is_infinite(t) || walk.size() > cap) break;

      const Tet& tet = c.tet(t);
      int candidates[3];
      int nc = 0;
      for (int j = 0; j < 4; ++j)
        if (j != entry && perturbed_orient(c, t, j, center) < 0) candidates[nc++] = j;
      if (nc == 0) break;  // center inside t
      exit_slot = candidates[0];
      if (nc > 1) {
        // Pick the face the line through target and center passes through.
        exit_slot = -1;
        for (int k = 0; k < nc && exit_slot < 0; ++k) {
          const auto& f = kTetFace[static_cast<std::size_t>(candidates[k])];
          const Vec3& a = c.point(tet.v[static_cast<std::size_t>(f[0])]);
          const Vec3& b = c.point(tet.v[static_cast<std::size_t>(f[1])]);
          const Vec3& d = c.point(tet.v[static_cast<std::size_t>(f[2])]);
          const int s0 = predicates::orient3d_perturbed_first(center, p, a, b);
          const int s1 = predicates::orient3d_perturbed_first(center, p, b, d);
          const int s2 = predicates::orient3d_perturbed_first(center, p, d, a);
          if (s0 != 0 && s0 == s1 && s1 == s2) exit_slot = candidates[k];
        }
        if (exit_slot < 0) throw Error("traverse_ray: walk lost the ray (internal error)");
      }
    }
    if (walk.size() > cap) throw Error("traverse_ray: walk did not terminate (internal error)");
  }
  std::reverse(walk.begin(), walk.end());
  out.tets = std::move(walk);

  // Crossing distances along the segment, measured from the target.
  const Vec3 dir = p - center;
  const double length = dir.norm();
  out.crossing_distance.reserve(out.tets.size() > 0 ? out.tets.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < out.tets.size(); ++k) {
    const std::int32_t a = out.tets[k];
    const Tet& tet = c.tet(a);
    int slot = -1;
    for (int i = 0; i < 4; ++i)
      if (tet.n[static_cast<std::size_t>(i)] == out.tets[k + 1]) slot = i;
    const auto f = c.face(a, slot);
    const Vec3& x = c.point(f[0]);
    const Vec3 normal = (c.point(f[1]) - x).cross(c.point(f[2]) - x);
    const double denom = normal.dot(dir);
    double s = denom != 0.0 ? normal.dot(x - center) / denom : 1.0;
    s = std::clamp(s, 0.0, 1.0);
    out.crossing_distance.push_back((1.0 - s) * length);
  }
  return out;
}

}  // namespace geofuse
