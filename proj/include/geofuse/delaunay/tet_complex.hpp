#pragma once

#include "geofuse/geom/types.hpp"

#include <filesystem>

namespace geofuse {

/// Vertex id standing for the symbolic point at infinity.
inline constexpr std::int32_t kInfiniteVertex = -1;

/// n[i] is the tet sharing the face opposite v[i].
struct Tet {
  std::array<std::int32_t, 4> v{};
  std::array<std::int32_t, 4> n{};
};

/// Vertex slots of the face opposite slot i, ordered so the face normal
/// (right-hand rule) points out of the tet.
inline constexpr std::array<std::array<int, 3>, 4> kTetFace = {{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

struct TetrahedralizeOptions;

/// Delaunay tetrahedralization closed with a symbolic infinite vertex: every
/// hull facet is glued to one infinite tet, so every tet has 4 neighbors.
///
/// Finite tets satisfy orient3d > 0. An infinite tet is oriented so that
/// replacing its infinite vertex with a point strictly beyond its hull facet
/// gives orient3d > 0.
class TetComplex {
 public:
  TetComplex() = default;

  /// Builds a complex from explicit finite tets over `points` (no Delaunay
  /// check). Negatively oriented tets are flipped; degenerate tets, repeated
  /// vertices and non-manifold faces are errors. The union of the tets must
  /// be convex for the infinite closure to be meaningful.
  static TetComplex from_tets(std::vector<Vec3> points, const std::vector<std::array<std::int32_t, 4>>& tets);

  [[nodiscard]] const std::vector<Vec3>& vertices() const { return vertices_; }
  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] const Vec3& point(std::int32_t v) const { return vertices_[static_cast<std::size_t>(v)]; }

  /// Input point index -> vertex id after exact-duplicate merging.
  [[nodiscard]] const std::vector<std::int32_t>& input_to_vertex() const { return input_to_vertex_; }

  [[nodiscard]] const std::vector<Tet>& tets() const { return tets_; }
  [[nodiscard]] std::size_t tet_count() const { return tets_.size(); }
  [[nodiscard]] const Tet& tet(std::int32_t t) const { return tets_[static_cast<std::size_t>(t)]; }
  [[nodiscard]] bool is_infinite(std::int32_t t) const { return infinite_slot(t) >= 0; }
  /// Slot of the infinite vertex, -1 for finite tets.
  [[nodiscard]] int infinite_slot(std::int32_t t) const;
  [[nodiscard]] std::size_t finite_tet_count() const;

  /// Slot of tet(t).n[i] that points back to t.
  [[nodiscard]] int mirror_slot(std::int32_t t, int i) const;
  /// Some tet having v as a vertex.
  [[nodiscard]] std::int32_t incident_tet(std::int32_t v) const { return incident_[static_cast<std::size_t>(v)]; }
  /// All tets having v as a vertex, sorted by id.
  [[nodiscard]] std::vector<std::int32_t> star(std::int32_t v) const;

  /// Face opposite slot i as vertex ids in outward order.
  [[nodiscard]] std::array<std::int32_t, 3> face(std::int32_t t, int i) const;

  /// orient3d of tet t with slot i replaced by q. Slot i must be the
  /// infinite slot or the tet must be finite.
  [[nodiscard]] int orient_with(std::int32_t t, int i, const Vec3& q) const;

  /// Structural checks (symmetric adjacency, orientation, hull closure).
  /// Returns a description of the first violation, empty when valid.
  [[nodiscard]] std::string check() const;

  /// ASCII dump, one tet per line: 4 vertex ids then 4 neighbor ids; the
  /// infinite vertex is written as -1.
  void dump(const std::filesystem::path& path) const;

 private:
  friend class TetBuilder;
  friend TetComplex tetrahedralize(const std::vector<Vec3>& points, const TetrahedralizeOptions& options);
  void rebuild_incidence();

  std::vector<Vec3> vertices_;
  std::vector<std::int32_t> input_to_vertex_;
  std::vector<Tet> tets_;
  std::vector<std::int32_t> incident_;
};

struct TetrahedralizeOptions {
  /// When set, every vertex is displaced by a seeded uniform offset of this
  /// magnitude times the bounding-box diagonal before insertion.
  std::optional<double> jitter;
  std::uint64_t seed = 0x5eed;
};

/// Incremental Delaunay tetrahedralization of `points` in input order.
/// Throws Error on fewer than 4 distinct points or coplanar input.
TetComplex tetrahedralize(const std::vector<Vec3>& points, const TetrahedralizeOptions& options = {});
inline TetComplex tetrahedralize(const PointCloud& cloud, const TetrahedralizeOptions& options = {}) {
  return tetrahedralize(cloud.positions, options);
}

/// Straight-walk point location with a per-caller cache of the last tet.
class TetLocator {
 public:
  explicit TetLocator(const TetComplex& complex, std::int32_t start = 0) : complex_(&complex), last_(start) {}
  /// A finite tet whose closure contains p, or an infinite tet whose hull
  /// facet p lies strictly beyond.
  std::int32_t locate(const Vec3& p);

 private:
  const TetComplex* complex_;
  std::int32_t last_;
};

std::int32_t locate(const TetComplex& complex, const Vec3& p);

/// Tets crossed by the segment from a view center to a complex vertex.
struct TetTraversal {
  /// tets.front() contains the view center (an infinite tet when the center
  /// is outside the hull); tets.back() is incident to the target vertex.
  std::vector<std::int32_t> tets;
  /// Distance from the target vertex to where the segment crosses the
  /// facet between tets[k] and tets[k + 1].
  std::vector<double> crossing_distance;
  /// Tet incident to the target entered when the ray is extended past it.
  std::int32_t behind = -1;
};

/// Walks the segment from `center` to vertex `target`. Exact crossings of
/// edges and vertices are resolved by symbolically perturbing the center.
TetTraversal traverse_ray(const TetComplex& complex, std::int32_t target, const Vec3& center);

}  // namespace geofuse
