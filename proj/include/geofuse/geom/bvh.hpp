#pragma once

#include "geofuse/geom/types.hpp"

namespace geofuse {

/// Watertight ray/triangle test (shear-and-scale formulation). Returns the
/// ray parameter of the hit, or nullopt. Rays through a shared edge hit
/// exactly one of the two adjacent triangles (up to orientation).
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& direction, const Vec3& a,
                                         const Vec3& b, const Vec3& c);

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Axis-aligned bounding-box tree over the faces of a mesh. The tree owns a
/// copy of the mesh; it is immutable after construction and safe to query
/// from many threads.
class Bvh {
 public:
  struct Node {
    Aabb box;
    std::int32_t left = -1;   // child node index, -1 for leaves
    std::int32_t right = -1;
    std::int32_t first = 0;   // leaf: range into the face order
    std::int32_t count = 0;
    [[nodiscard]] bool is_leaf() const { return left < 0; }
  };

  explicit Bvh(TriangleMesh mesh, int leaf_size = 4);

  [[nodiscard]] const TriangleMesh& mesh() const { return mesh_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  /// Face ids in leaf order; leaf nodes index ranges of this array.
  [[nodiscard]] const std::vector<std::int32_t>& face_order() const { return order_; }
  [[nodiscard]] const Aabb& bounds() const { return nodes_.front().box; }
  /// Default self-intersection epsilon: 1e-6 of the scene diagonal.
  [[nodiscard]] double ray_epsilon() const { return ray_epsilon_; }

  /// Nearest hit with t > epsilon (ray.min_range or ray_epsilon()) and
  /// t <= ray.max_range.
  [[nodiscard]] std::optional<Hit> ray_cast(const Ray& ray) const;
  /// True when any face is hit with t in (epsilon, max_t).
  [[nodiscard]] bool occluded(const Vec3& origin, const Vec3& direction, double max_t) const;

  struct Closest {
    Vec3 point;
    double distance = 0.0;
    std::int32_t face = -1;
  };
  [[nodiscard]] Closest closest_point(const Vec3& p) const;

 private:
  std::int32_t build(std::int32_t first, std::int32_t count, std::vector<Vec3>& centroids);
  [[nodiscard]] Hit make_hit(const Ray& ray, double t, std::int32_t face) const;

  TriangleMesh mesh_;
  int leaf_size_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> order_;
  double ray_epsilon_ = 0.0;
};

/// Ray cast helper mirroring the free-function form used across modules.
inline std::optional<Hit> ray_cast(const Bvh& bvh, const Ray& ray) { return bvh.ray_cast(ray); }

}  // namespace geofuse
