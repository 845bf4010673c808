#include "geofuse/visibility/hull.hpp"

#include "geofuse/delaunay/predicates.hpp"

#include <algorithm>
#include <map>

namespace geofuse {

namespace {

using predicates::orient3d;

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
  using predicates::orient2d;
  return orient2d(a.x(), a.y(), b.x(), b.y(), c.x(), c.y()) == 0 &&
         orient2d(a.y(), a.z(), b.y(), b.z(), c.y(), c.z()) == 0 &&
         orient2d(a.z(), a.x(), b.z(), b.x(), c.z(), c.x()) == 0;
}

struct HullFace {
  std::array<std::int32_t, 3> v{};
  std::array<std::int32_t, 3> nb{-1, -1, -1};  // across edge (v[e], v[e+1])
  Vec3 normal = Vec3::Zero();                   // unnormalised, for distances only
  std::vector<std::int32_t> outside;
  std::int32_t far = -1;
  double far_dist = 0.0;
  bool alive = true;
};

class Quickhull {
 public:
  explicit Quickhull(const std::vector<Vec3>& p) : p_(p) {}

  std::vector<Face> run() {
    std::array<std::int32_t, 4> s = initial_simplex();
    if (orient3d(p_[s[0]], p_[s[1]], p_[s[2]], p_[s[3]]) < 0) std::swap(s[0], s[1]);
    static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (const auto& f : kFaces) add_face(s[f[0]], s[f[1]], s[f[2]]);
    link_initial();

    std::vector<std::int32_t> first(faces_.size());
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = static_cast<std::int32_t>(i);
    std::vector<std::int32_t> pts;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(p_.size()); ++i) {
      if (std::find(s.begin(), s.end(), i) == s.end()) pts.push_back(i);
    }
    assign(pts, first);

    start_.assign(p_.size(), -1);
    end_.assign(p_.size(), -1);
    std::vector<std::int32_t> pending = first;
    while (!pending.empty()) {
      const std::int32_t f = pending.back();
      pending.pop_back();
      if (!faces_[f].alive || faces_[f].outside.empty()) continue;
      auto created = add_point(f);
      for (std::int32_t g : created) {
        if (!faces_[g].outside.empty()) pending.push_back(g);
      }
    }

    std::vector<Face> out;
    for (const auto& f : faces_) {
      if (f.alive) out.push_back({f.v[0], f.v[1], f.v[2]});
    }
    return out;
  }

 private:
  std::array<std::int32_t, 4> initial_simplex() const {
    const auto n = static_cast<std::int32_t>(p_.size());
    const Aabb box = bounds_of(p_);
    const Vec3 ext = box.extent();
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (ext[a] > ext[axis]) axis = a;
    }
    std::int32_t i0 = 0, i1 = 0;
    for (std::int32_t i = 1; i < n; ++i) {
      if (p_[i][axis] < p_[i0][axis]) i0 = i;
      if (p_[i][axis] > p_[i1][axis]) i1 = i;
    }
    if (p_[i0] == p_[i1]) throw Error("convex_hull3: degenerate input (all points coincide)");

    const Vec3 dir = p_[i1] - p_[i0];
    std::int32_t i2 = -1;
    double best = -1.0;
    for (std::int32_t i = 0; i < n; ++i) {
      const double d = dir.cross(p_[i] - p_[i0]).squaredNorm();
      if (d > best) best = d, i2 = i;
    }
    if (collinear(p_[i0], p_[i1], p_[i2])) {
      i2 = -1;
      for (std::int32_t i = 0; i < n && i2 < 0; ++i) {
        if (!collinear(p_[i0], p_[i1], p_[i])) i2 = i;
      }
      if (i2 < 0) throw Error("convex_hull3: degenerate input (all points collinear)");
    }

    const Vec3 normal = (p_[i1] - p_[i0]).cross(p_[i2] - p_[i0]);
    std::int32_t i3 = -1;
    best = -1.0;
    for (std::int32_t i = 0; i < n; ++i) {
      const double d = std::abs(normal.dot(p_[i] - p_[i0]));
      if (d > best) best = d, i3 = i;
    }
    if (orient3d(p_[i0], p_[i1], p_[i2], p_[i3]) == 0) {
      i3 = -1;
      for (std::int32_t i = 0; i < n && i3 < 0; ++i) {
        if (orient3d(p_[i0], p_[i1], p_[i2], p_[i]) != 0) i3 = i;
      }
      if (i3 < 0) throw Error("convex_hull3: degenerate input (all points coplanar)");
    }
    return {i0, i1, i2, i3};
  }

  std::int32_t add_face(std::int32_t a, std::int32_t b, std::int32_t c) {
    HullFace f;
    f.v = {a, b, c};
    f.normal = (p_[b] - p_[a]).cross(p_[c] - p_[a]);
    faces_.push_back(std::move(f));
    return static_cast<std::int32_t>(faces_.size() - 1);
  }

  void link_initial() {
    std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> edge;
    for (std::int32_t f = 0; f < 4; ++f) {
      for (int e = 0; e < 3; ++e) edge[{faces_[f].v[e], faces_[f].v[(e + 1) % 3]}] = f;
    }
    for (std::int32_t f = 0; f < 4; ++f) {
      for (int e = 0; e < 3; ++e) faces_[f].nb[e] = edge.at({faces_[f].v[(e + 1) % 3], faces_[f].v[e]});
    }
  }

  bool above(std::int32_t f, std::int32_t q) const {
    const auto& v = faces_[f].v;
    return orient3d(p_[v[0]], p_[v[1]], p_[v[2]], p_[q]) > 0;
  }

  // Each point goes to the first candidate face it is strictly above; points
  // above none are inside the current hull and dropped.
  void assign(const std::vector<std::int32_t>& pts, const std::vector<std::int32_t>& candidates) {
    for (std::int32_t q : pts) {
      for (std::int32_t f : candidates) {
        if (!above(f, q)) continue;
        HullFace& face = faces_[f];
        const double d = face.normal.dot(p_[q] - p_[face.v[0]]);
        if (face.far < 0 || d > face.far_dist) face.far = q, face.far_dist = d;
        face.outside.push_back(q);
        break;
      }
    }
  }

  std::vector<std::int32_t> add_point(std::int32_t f0) {
    const std::int32_t eye = faces_[f0].far;

    // Faces strictly visible from the eye form a connected patch around f0.
    std::vector<std::int32_t> visible{f0}, horizon_face, horizon_edge;
    faces_[f0].alive = false;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const HullFace& f = faces_[visible[k]];
      for (int e = 0; e < 3; ++e) {
        const std::int32_t g = f.nb[e];
        if (!faces_[g].alive) continue;
        if (above(g, eye)) {
          faces_[g].alive = false;
          visible.push_back(g);
        } else {
          horizon_face.push_back(visible[k]);
          horizon_edge.push_back(e);
        }
      }
    }
    std::vector<std::int32_t> created;
    std::vector<std::int32_t> touched;
    for (std::size_t h = 0; h < horizon_face.size(); ++h) {
      const HullFace& f = faces_[horizon_face[h]];
      const int e = horizon_edge[h];
      const std::int32_t g = f.nb[e];
      if (!faces_[g].alive) continue;
      const std::int32_t a = f.v[e], b = f.v[(e + 1) % 3];
      const std::int32_t nf = add_face(a, b, eye);
      HullFace& other = faces_[g];
      for (int k = 0; k < 3; ++k) {
        if (other.v[k] == b && other.v[(k + 1) % 3] == a) other.nb[k] = nf;
      }
      faces_[nf].nb[0] = g;
      start_[a] = nf;
      end_[b] = nf;
      touched.push_back(a);
      touched.push_back(b);
      created.push_back(nf);
    }
    for (std::int32_t nf : created) {
      HullFace& f = faces_[nf];
      f.nb[1] = start_[f.v[1]];
      f.nb[2] = end_[f.v[0]];
    }
    for (std::int32_t t : touched) start_[t] = end_[t] = -1;

    std::vector<std::int32_t> orphans;
    for (std::int32_t v : visible) {
      for (std::int32_t q : faces_[v].outside) {
        if (q != eye) orphans.push_back(q);
      }
      faces_[v].outside.clear();
      faces_[v].outside.shrink_to_fit();
    }
    assign(orphans, created);
    return created;
  }

  const std::vector<Vec3>& p_;
  std::vector<HullFace> faces_;
  std::vector<std::int32_t> start_, end_;
};

}  // namespace

std::vector<Face> convex_hull_faces(const std::vector<Vec3>& points) {
  if (points.size() < 4) throw Error("convex_hull3: degenerate input (fewer than 4 points)");
  return Quickhull(points).run();
}

TriangleMesh convex_hull3(const std::vector<Vec3>& points) {
  auto faces = convex_hull_faces(points);
  std::vector<std::int32_t> remap(points.size(), -1);
  for (const auto& f : faces) {
    for (auto v : f) remap[static_cast<std::size_t>(v)] = 0;
  }
  TriangleMesh mesh;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<std::int32_t>(mesh.vertices.size());
    mesh.vertices.push_back(points[i]);
  }
  for (auto& f : faces) {
    for (auto& v : f) v = remap[static_cast<std::size_t>(v)];
  }
  mesh.faces = std::move(faces);
  return mesh;
}

}  // namespace geofuse
