#include "geofuse/delaunay/tet_complex.hpp"

#include "geofuse/delaunay/predicates.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

namespace geofuse {

namespace {

std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a + 1)) << 32) |
         static_cast<std::uint32_t>(b + 1);
}

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
  using predicates::orient2d;
  return orient2d(a.x(), a.y(), b.x(), b.y(), c.x(), c.y()) == 0 &&
         orient2d(a.y(), a.z(), b.y(), b.z(), c.y(), c.z()) == 0 &&
         orient2d(a.z(), a.x(), b.z(), b.x(), c.z(), c.x()) == 0;
}

}  // namespace

// Owns the mutable construction state; TetComplex itself is immutable to
// outside code.
class TetBuilder {
 public:
  explicit TetBuilder(TetComplex& c) : c_(c) {}

  // Links the faces of `fresh` that contain `apex`, pairing them by the two
  // other vertices of each face.
  void link_around(const std::vector<std::int32_t>& fresh, std::int32_t apex) {
    scratch_.clear();
    for (const std::int32_t t : fresh) {
      const Tet& tet = c_.tets_[static_cast<std::size_t>(t)];
      for (int j = 0; j < 4; ++j) {
        if (tet.v[static_cast<std::size_t>(j)] == apex) continue;
        std::int32_t other[2];
        int m = 0;
        for (int k = 0; k < 4; ++k) {
          const std::int32_t v = tet.v[static_cast<std::size_t>(k)];
          if (k != j && v != apex) other[m++] = v;
        }
        scratch_.push_back({pair_key(other[0], other[1]), t, j});
      }
    }
    std::sort(scratch_.begin(), scratch_.end(), [](const Half& a, const Half& b) {
      return a.key < b.key || (a.key == b.key && a.tet < b.tet);
    });
    for (std::size_t k = 0; k < scratch_.size(); k += 2) {
      if (k + 1 >= scratch_.size() || scratch_[k].key != scratch_[k + 1].key ||
          (k + 2 < scratch_.size() && scratch_[k + 2].key == scratch_[k].key))
        throw Error("tetrahedralization: boundary is not a closed manifold");
      c_.tets_[static_cast<std::size_t>(scratch_[k].tet)].n[static_cast<std::size_t>(scratch_[k].slot)] =
          scratch_[k + 1].tet;
      c_.tets_[static_cast<std::size_t>(scratch_[k + 1].tet)].n[static_cast<std::size_t>(scratch_[k + 1].slot)] =
          scratch_[k].tet;
    }
  }

  // Glues an infinite tet onto every face of finite tets that has no
  // neighbor yet (neighbor id -1).
  void close_hull() {
    std::vector<std::int32_t> fresh;
    const auto count = static_cast<std::int32_t>(c_.tets_.size());
    for (std::int32_t t = 0; t < count; ++t) {
      for (int i = 0; i < 4; ++i) {
        if (c_.tets_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(i)] != -1) continue;
        Tet inf = c_.tets_[static_cast<std::size_t>(t)];
        inf.v[static_cast<std::size_t>(i)] = kInfiniteVertex;
        const int a = (i + 1) % 4, b = (i + 2) % 4;
        std::swap(inf.v[static_cast<std::size_t>(a)], inf.v[static_cast<std::size_t>(b)]);
        inf.n = {-1, -1, -1, -1};
        inf.n[static_cast<std::size_t>(i)] = t;
        const auto id = static_cast<std::int32_t>(c_.tets_.size());
        c_.tets_.push_back(inf);
        c_.tets_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(i)] = id;
        fresh.push_back(id);
      }
    }
    link_around(fresh, kInfiniteVertex);
  }

  void build_delaunay(const std::vector<Vec3>& verts) {
    const auto n = static_cast<std::int32_t>(verts.size());
    if (n < 4) throw Error("tetrahedralize: fewer than 4 distinct points");
    std::int32_t i2 = -1, i3 = -1;
    for (std::int32_t i = 2; i < n && i2 < 0; ++i)
      if (!collinear(verts[0], verts[1], verts[static_cast<std::size_t>(i)])) i2 = i;
    for (std::int32_t i = i2 < 0 ? n : i2 + 1; i < n && i3 < 0; ++i)
      if (predicates::orient3d(verts[0], verts[1], verts[static_cast<std::size_t>(i2)],
                               verts[static_cast<std::size_t>(i)]) != 0)
        i3 = i;
    if (i3 < 0) throw Error("tetrahedralize: degenerate input (all points coplanar)");

    Tet first;
    first.v = {0, 1, i2, i3};
    if (predicates::orient3d(verts[0], verts[1], verts[static_cast<std::size_t>(i2)],
                             verts[static_cast<std::size_t>(i3)]) < 0)
      std::swap(first.v[0], first.v[1]);
    first.n = {-1, -1, -1, -1};
    c_.tets_.push_back(first);
    alive_.assign(1, 1);
    close_hull();
    alive_.assign(c_.tets_.size(), 1);
    mark_.assign(c_.tets_.size(), 0);

    for (std::int32_t v = 2; v < n; ++v) {
      if (v == i2 || v == i3) continue;
      insert(v);
    }
    compact();
  }

 private:
  struct Half {
    std::uint64_t key;
    std::int32_t tet;
    int slot;
  };

  const Vec3& pos(std::int32_t v) const { return c_.vertices_[static_cast<std::size_t>(v)]; }

  bool in_conflict(std::int32_t t, const Vec3& p) const {
    const Tet& tet = c_.tets_[static_cast<std::size_t>(t)];
    const int k = c_.infinite_slot(t);
    if (k < 0) return predicates::in_sphere_oriented(pos(tet.v[0]), pos(tet.v[1]), pos(tet.v[2]), pos(tet.v[3]), p) > 0;
    const int o = c_.orient_with(t, k, p);
    if (o != 0) return o > 0;
    // On the hull facet's plane: conflict exactly when the finite tet behind
    // the facet is in conflict, i.e. p is inside the facet's circumcircle.
    return in_conflict(tet.n[static_cast<std::size_t>(k)], p);
  }

  std::int32_t find_conflict(const Vec3& p) {
    TetLocator locator(c_, last_);
    std::int32_t t = locator.locate(p);
    if (alive_[static_cast<std::size_t>(t)] && in_conflict(t, p)) return t;
    for (std::size_t i = 0; i < c_.tets_.size(); ++i) {
      const auto id = static_cast<std::int32_t>(i);
      if (alive_[i] && in_conflict(id, p)) return id;
    }
    throw Error("tetrahedralize: no conflicting tet found (internal error)");
  }

  std::int32_t alloc(const Tet& tet) {
    if (!free_.empty()) {
      const std::int32_t id = free_.back();
      free_.pop_back();
      c_.tets_[static_cast<std::size_t>(id)] = tet;
      alive_[static_cast<std::size_t>(id)] = 1;
      mark_[static_cast<std::size_t>(id)] = 0;
      return id;
    }
    c_.tets_.push_back(tet);
    alive_.push_back(1);
    mark_.push_back(0);
    return static_cast<std::int32_t>(c_.tets_.size() - 1);
  }

  void insert(std::int32_t vid) {
    const Vec3& p = pos(vid);
    ++stamp_;
    cavity_.clear();
    stack_.clear();
    const std::int32_t seed = find_conflict(p);
    stack_.push_back(seed);
    mark_[static_cast<std::size_t>(seed)] = stamp_;
    while (!stack_.empty()) {
      const std::int32_t t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      for (const std::int32_t nb : c_.tets_[static_cast<std::size_t>(t)].n) {
        if (mark_[static_cast<std::size_t>(nb)] == stamp_ || mark_[static_cast<std::size_t>(nb)] == -stamp_) continue;
        if (in_conflict(nb, p)) {
          mark_[static_cast<std::size_t>(nb)] = stamp_;
          stack_.push_back(nb);
        } else {
          mark_[static_cast<std::size_t>(nb)] = -stamp_;
        }
      }
    }

    fresh_.clear();
    for (const std::int32_t t : cavity_) {
      for (int i = 0; i < 4; ++i) {
        const Tet old = c_.tets_[static_cast<std::size_t>(t)];
        const std::int32_t nb = old.n[static_cast<std::size_t>(i)];
        if (mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
        Tet made = old;
        made.v[static_cast<std::size_t>(i)] = vid;
        made.n = {-1, -1, -1, -1};
        made.n[static_cast<std::size_t>(i)] = nb;
        const std::int32_t id = alloc(made);
        Tet& outside = c_.tets_[static_cast<std::size_t>(nb)];
        for (auto& back : outside.n)
          if (back == t) back = id;
        fresh_.push_back(id);
      }
    }
    link_around(fresh_, vid);
    for (const std::int32_t t : cavity_) {
      alive_[static_cast<std::size_t>(t)] = 0;
      mark_[static_cast<std::size_t>(t)] = 0;
      free_.push_back(t);
    }
    last_ = fresh_.front();
  }

  void compact() {
    std::vector<std::int32_t> remap(c_.tets_.size(), -1);
    std::vector<Tet> kept;
    kept.reserve(c_.tets_.size() - free_.size());
    for (std::size_t i = 0; i < c_.tets_.size(); ++i) {
      if (!alive_[i]) continue;
      remap[i] = static_cast<std::int32_t>(kept.size());
      kept.push_back(c_.tets_[i]);
    }
    for (Tet& t : kept)
      for (auto& nb : t.n) nb = remap[static_cast<std::size_t>(nb)];
    c_.tets_ = std::move(kept);
  }

  TetComplex& c_;
  std::vector<Half> scratch_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::int32_t> mark_;
  std::vector<std::int32_t> free_, cavity_, stack_, fresh_;
  std::int32_t stamp_ = 0;
  std::int32_t last_ = 0;
};

int TetComplex::infinite_slot(std::int32_t t) const {
  const Tet& tet = tets_[static_cast<std::size_t>(t)];
  for (int i = 0; i < 4; ++i)
    if (tet.v[static_cast<std::size_t>(i)] == kInfiniteVertex) return i;
  return -1;
}

std::size_t TetComplex::finite_tet_count() const {
  std::size_t count = 0;
  for (std::size_t t = 0; t < tets_.size(); ++t)
    if (!is_infinite(static_cast<std::int32_t>(t))) ++count;
  return count;
}

int TetComplex::mirror_slot(std::int32_t t, int i) const {
  const Tet& nb = tets_[static_cast<std::size_t>(tets_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(i)])];
  for (int j = 0; j < 4; ++j)
    if (nb.n[static_cast<std::size_t>(j)] == t) return j;
  throw Error("tet complex: asymmetric adjacency");
}

std::vector<std::int32_t> TetComplex::star(std::int32_t v) const {
  std::vector<std::int32_t> out{incident_tet(v)};
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Tet& tet = tets_[static_cast<std::size_t>(out[k])];
    for (int i = 0; i < 4; ++i) {
      if (tet.v[static_cast<std::size_t>(i)] == v) continue;
      const std::int32_t nb = tet.n[static_cast<std::size_t>(i)];
      if (std::find(out.begin(), out.end(), nb) == out.end()) out.push_back(nb);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<std::int32_t, 3> TetComplex::face(std::int32_t t, int i) const {
  const Tet& tet = tets_[static_cast<std::size_t>(t)];
  const auto& f = kTetFace[static_cast<std::size_t>(i)];
  return {tet.v[static_cast<std::size_t>(f[0])], tet.v[static_cast<std::size_t>(f[1])],
          tet.v[static_cast<std::size_t>(f[2])]};
}

int TetComplex::orient_with(std::int32_t t, int i, const Vec3& q) const {
  const Tet& tet = tets_[static_cast<std::size_t>(t)];
  std::array<const Vec3*, 4> p{};
  for (int k = 0; k < 4; ++k) {
    if (k == i) {
      p[static_cast<std::size_t>(k)] = &q;
    } else {
      const std::int32_t v = tet.v[static_cast<std::size_t>(k)];
      if (v == kInfiniteVertex) throw Error("orient_with: infinite vertex left in place");
      p[static_cast<std::size_t>(k)] = &point(v);
    }
  }
  return predicates::orient3d(*p[0], *p[1], *p[2], *p[3]);
}

void TetComplex::rebuild_incidence() {
  incident_.assign(vertices_.size(), -1);
  for (std::size_t t = 0; t < tets_.size(); ++t)
    for (const std::int32_t v : tets_[t].v)
      if (v != kInfiniteVertex && incident_[static_cast<std::size_t>(v)] < 0)
        incident_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(t);
}

std::string TetComplex::check() const {
  const auto count = static_cast<std::int32_t>(tets_.size());
  for (std::int32_t t = 0; t < count; ++t) {
    const Tet& tet = tets_[static_cast<std::size_t>(t)];
    const int k = infinite_slot(t);
    for (int i = 0; i < 4; ++i) {
      const std::int32_t nb = tet.n[static_cast<std::size_t>(i)];
      if (nb < 0 || nb >= count) return "tet " + std::to_string(t) + " has an invalid neighbor";
      const Tet& other = tets_[static_cast<std::size_t>(nb)];
      int back = -1;
      for (int j = 0; j < 4; ++j)
        if (other.n[static_cast<std::size_t>(j)] == t) back = j;
      if (back < 0) return "adjacency of tets " + std::to_string(t) + " and " + std::to_string(nb) + " is not symmetric";
      auto fa = face(t, i);
      auto fb = face(nb, back);
      std::sort(fa.begin(), fa.end());
      std::sort(fb.begin(), fb.end());
      if (fa != fb) return "tets " + std::to_string(t) + " and " + std::to_string(nb) + " do not share a face";
      if (k >= 0 && i == k && infinite_slot(nb) >= 0)
        return "hull facet of tet " + std::to_string(t) + " adjoins two infinite tets";
    }
    if (k < 0) {
      if (orient_with(t, 0, point(tet.v[0])) <= 0) return "finite tet " + std::to_string(t) + " is not positively oriented";
    } else {
      // The finite vertex across the hull facet must lie on the inner side.
      const std::int32_t nb = tet.n[static_cast<std::size_t>(k)];
      const Tet& inner = tets_[static_cast<std::size_t>(nb)];
      std::int32_t apex = -1;
      for (const std::int32_t v : inner.v)
        if (std::find(tet.v.begin(), tet.v.end(), v) == tet.v.end()) apex = v;
      if (apex < 0 || orient_with(t, k, point(apex)) >= 0)
        return "infinite tet " + std::to_string(t) + " is not oriented away from the hull";
    }
  }
  return {};
}

void TetComplex::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const Tet& t : tets_)
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.v[3] << ' ' << t.n[0] << ' ' << t.n[1] << ' '
        << t.n[2] << ' ' << t.n[3] << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

TetComplex TetComplex::from_tets(std::vector<Vec3> points, const std::vector<std::array<std::int32_t, 4>>& tets) {
  TetComplex c;
  c.vertices_ = std::move(points);
  c.input_to_vertex_.resize(c.vertices_.size());
  for (std::size_t i = 0; i < c.vertices_.size(); ++i) c.input_to_vertex_[i] = static_cast<std::int32_t>(i);
  if (tets.empty()) throw Error("from_tets: no tets given");

  std::map<std::array<std::int32_t, 3>, std::pair<std::int32_t, int>> faces;
  for (std::size_t t = 0; t < tets.size(); ++t) {
    Tet tet;
    tet.v = tets[t];
    tet.n = {-1, -1, -1, -1};
    for (const std::int32_t v : tet.v)
      if (v < 0 || static_cast<std::size_t>(v) >= c.vertices_.size())
        throw Error("from_tets: tet " + std::to_string(t) + " references a missing vertex");
    const int o = predicates::orient3d(c.point(tet.v[0]), c.point(tet.v[1]), c.point(tet.v[2]), c.point(tet.v[3]));
    if (o == 0) throw Error("from_tets: tet " + std::to_string(t) + " is degenerate");
    if (o < 0) std::swap(tet.v[2], tet.v[3]);
    c.tets_.push_back(tet);
    const auto id = static_cast<std::int32_t>(t);
    for (int i = 0; i < 4; ++i) {
      auto key = c.face(id, i);
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.emplace(key, std::make_pair(id, i));
      if (inserted) continue;
      auto [other, slot] = it->second;
      if (other < 0) throw Error("from_tets: face shared by more than two tets");
      c.tets_[static_cast<std::size_t>(other)].n[static_cast<std::size_t>(slot)] = id;
      c.tets_[t].n[static_cast<std::size_t>(i)] = other;
      it->second = {-1, -1};
    }
  }
  TetBuilder(c).close_hull();
  c.rebuild_incidence();
  for (std::size_t v = 0; v < c.vertices_.size(); ++v)
    if (c.incident_[v] < 0) throw Error("from_tets: vertex " + std::to_string(v) + " is not used by any tet");
  return c;
}

TetComplex tetrahedralize(const std::vector<Vec3>& points, const TetrahedralizeOptions& options) {
  TetComplex c;
  c.vertices_.reserve(points.size());
  c.input_to_vertex_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].allFinite()) throw Error("tetrahedralize: point " + std::to_string(i) + " is not finite");

  // Exact duplicate merge, keeping first-occurrence order.
  std::vector<std::int32_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
  auto lex_less = [&](std::int32_t a, std::int32_t b) {
    const Vec3& pa = points[static_cast<std::size_t>(a)];
    const Vec3& pb = points[static_cast<std::size_t>(b)];
    for (int k = 0; k < 3; ++k)
      if (pa[k] != pb[k]) return pa[k] < pb[k];
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex_less);
  std::vector<std::int32_t> representative(points.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = static_cast<std::size_t>(order[k]);
    const bool dup = k > 0 && points[i] == points[static_cast<std::size_t>(order[k - 1])];
    representative[i] = dup ? representative[static_cast<std::size_t>(order[k - 1])] : static_cast<std::int32_t>(i);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto rep = static_cast<std::size_t>(representative[i]);
    if (rep == i) {
      c.input_to_vertex_[i] = static_cast<std::int32_t>(c.vertices_.size());
      c.vertices_.push_back(points[i]);
    } else {
      c.input_to_vertex_[i] = c.input_to_vertex_[rep];
    }
  }

  if (options.jitter && *options.jitter > 0.0) {
    const double scale = *options.jitter * bounds_of(c.vertices_).diagonal();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Vec3& v : c.vertices_) {
      const double dx = unit(rng), dy = unit(rng), dz = unit(rng);
      v += scale * Vec3(dx, dy, dz);
    }
  }

  const std::vector<Vec3> verts = c.vertices_;
  TetBuilder(c).build_delaunay(verts);
  c.rebuild_incidence();
  return c;
}

std::int32_t TetLocator::locate(const Vec3& p) {
  const TetComplex& c = *complex_;
  const auto count = static_cast<std::int32_t>(c.tet_count());
  std::int32_t t = (last_ >= 0 && last_ < count) ? last_ : 0;
  // Rotating the first face tried keeps the walk from cycling on
  // degenerate configurations.
  std::uint32_t rot = 0;
  const std::int64_t cap = 4 * static_cast<std::int64_t>(count) + 64;
  for (std::int64_t step = 0; step < cap; ++step) {
    const Tet& tet = c.tet(t);
    const int k = c.infinite_slot(t);
    if (k >= 0) {
      if (c.orient_with(t, k, p) > 0) {
        last_ = t;
        return t;
      }
      t = tet.n[static_cast<std::size_t>(k)];
      continue;
    }
    rot = rot * 1664525u + 1013904223u;
    std::int32_t next = -1;
    for (int r = 0; r < 4 && next < 0; ++r) {
      const int i = static_cast<int>((rot >> 16) + static_cast<std::uint32_t>(r)) & 3;
      if (c.orient_with(t, i, p) < 0) next = tet.n[static_cast<std::size_t>(i)];
    }
    if (next < 0) {
      last_ = t;
      return t;
    }
    t = next;
  }
  // Walk did not converge; exhaustive search.
  for (std::int32_t s = 0; s < count; ++s) {
    const int k = c.infinite_slot(s);
    bool inside = true;
    if (k >= 0) {
      inside = c.orient_with(s, k, p) > 0;
    } else {
      for (int i = 0; i < 4 && inside; ++i) inside = c.orient_with(s, i, p) >= 0;
    }
    if (inside) {
      last_ = s;
      return s;
    }
  }
  throw Error("locate: point not found in complex");
}

std::int32_t locate(const TetComplex& complex, const Vec3& p) {
  TetLocator locator(complex);
  return locator.locate(p);
}

}  // namespace geofuse
