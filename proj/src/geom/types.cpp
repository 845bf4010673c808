#include "geofuse/geom/types.hpp"

#include <string>

namespace geofuse {

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const Face& tri = faces[f];
  const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriangleMesh::face_area(std::size_t f) const {
  const Face& tri = faces[f];
  return 0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).norm();
}

void validate_mesh(const TriangleMesh& mesh) {
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& tri = mesh.faces[f];
    for (const auto idx : tri) {
      if (idx < 0 || idx >= n) {
        throw Error("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                    " but the mesh has " + std::to_string(n) + " vertices");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw Error("face " + std::to_string(f) + " repeats a vertex index");
    }
  }
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes) {
  TriangleMesh out;
  for (const auto& m : meshes) {
    const auto offset = static_cast<std::int32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
    for (const auto& f : m.faces) out.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
  }
  return out;
}

int Aabb::longest_axis() const {
  const Vec3 e = extent();
  if (e.x() >= e.y() && e.x() >= e.z()) return 0;
  return e.y() >= e.z() ? 1 : 2;
}

Aabb bounds_of(const std::vector<Vec3>& points) {
  Aabb box;
  for (const auto& p : points) box.extend(p);
  return box;
}

}  // namespace geofuse
