#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geofuse {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Error raised by every geofuse operation on invalid input or I/O failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb> colors;  // empty or same length as positions

  [[nodiscard]] std::size_t size() const { return positions.size(); }
  [[nodiscard]] bool empty() const { return positions.empty(); }
  [[nodiscard]] bool has_colors() const { return !colors.empty(); }
};

using Face = std::array<std::int32_t, 3>;

/// Indexed triangle surface. Faces are counter-clockwise seen from the side
/// their normal points to.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  [[nodiscard]] bool empty() const { return faces.empty(); }
  [[nodiscard]] Vec3 face_normal(std::size_t f) const;  // unit, zero for degenerate faces
  [[nodiscard]] double face_area(std::size_t f) const;
};

/// Checks index ranges and repeated indices; throws Error naming the face.
void validate_mesh(const TriangleMesh& mesh);

/// Concatenates meshes, offsetting face indices.
TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes);

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  [[nodiscard]] bool valid() const { return (min.array() <= max.array()).all(); }
  [[nodiscard]] Vec3 center() const { return 0.5 * (min + max); }
  [[nodiscard]] Vec3 extent() const { return max - min; }
  [[nodiscard]] double diagonal() const { return valid() ? extent().norm() : 0.0; }
  [[nodiscard]] int longest_axis() const;
  [[nodiscard]] bool contains(const Aabb& b) const {
    return (min.array() <= b.min.array()).all() && (b.max.array() <= max.array()).all();
  }
};

Aabb bounds_of(const std::vector<Vec3>& points);

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
  std::optional<double> max_range;
  std::optional<double> min_range;  // overrides the BVH's self-intersection epsilon
};

struct Hit {
  double t = 0.0;
  std::int32_t face = -1;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // geometric, unit, follows face winding
};

}  // namespace geofuse
