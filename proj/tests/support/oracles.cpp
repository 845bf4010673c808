#include "oracles.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <cmath>
#include <unistd.h>

namespace oracle {

namespace {

using Row = std::array<mpq_class, 3>;

mpq_class det3(const Row& r0, const Row& r1, const Row& r2) {
  return r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0]) +
         r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
}

Row diff(const Vec3& a, const Vec3& b) {
  return {mpq_class(a.x()) - mpq_class(b.x()), mpq_class(a.y()) - mpq_class(b.y()),
          mpq_class(a.z()) - mpq_class(b.z())};
}

}  // namespace

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return sgn(det3(diff(b, a), diff(c, a), diff(d, a)));
}

int in_sphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  // 4x4 lifted determinant with rows (p - e, |p - e|^2), expanded by the
  // lift column.
  const Row r[4] = {diff(a, e), diff(b, e), diff(c, e), diff(d, e)};
  mpq_class lift[4];
  for (int i = 0; i < 4; ++i) lift[i] = r[i][0] * r[i][0] + r[i][1] * r[i][1] + r[i][2] * r[i][2];
  const mpq_class det = -lift[0] * det3(r[1], r[2], r[3]) + lift[1] * det3(r[0], r[2], r[3]) -
                        lift[2] * det3(r[0], r[1], r[3]) + lift[3] * det3(r[0], r[1], r[2]);
  // The lifted determinant is negative inside for positively oriented tets.
  const int o = orient3d(a, b, c, d);
  return -sgn(det) * o;
}

std::vector<Vec3> uniform_box(std::size_t n, std::uint64_t seed, double half) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    const double x = u(rng), y = u(rng), z = u(rng);
    p = Vec3(x, y, z);
  }
  return out;
}

std::vector<Vec3> uniform_sphere(std::size_t n, std::uint64_t seed, double radius, const Vec3& center) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    Vec3 d;
    do {
      const double x = g(rng), y = g(rng), z = g(rng);
      d = Vec3(x, y, z);
    } while (d.norm() < 1e-12);
    p = center + radius * d.normalized();
  }
  return out;
}

geofuse::TriangleMesh cube_mesh(double lo, double hi) {
  geofuse::TriangleMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.emplace_back(i & 1 ? hi : lo, i & 2 ? hi : lo, i & 4 ? hi : lo);
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

geofuse::TriangleMesh icosphere(int subdivisions, double radius, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<geofuse::Face> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
                                  {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                  {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
                                  {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int id = static_cast<int>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<geofuse::Face> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  geofuse::TriangleMesh m;
  for (const auto& p : v) m.vertices.push_back(center + radius * p);
  m.faces = std::move(f);
  return m;
}

BruteHit brute_ray(const geofuse::TriangleMesh& mesh, const Vec3& o, const Vec3& d, double t_min) {
  BruteHit best;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][0])];
    const Vec3 e1 = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][1])] - a;
    const Vec3 e2 = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][2])] - a;
    const Vec3 pv = d.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-300) continue;
    const Vec3 tv = o - a;
    const double u = tv.dot(pv) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qv = tv.cross(e1);
    const double w = d.dot(qv) / det;
    if (w < 0.0 || u + w > 1.0) continue;
    const double t = e2.dot(qv) / det;
    if (t > t_min && (best.t < 0.0 || t < best.t)) {
      best.t = t;
      best.face = static_cast<int>(f);
    }
  }
  return best;
}

MeshTopology mesh_topology(const geofuse::TriangleMesh& mesh) {
  MeshTopology topo;
  std::map<std::pair<int, int>, int> directed;
  std::map<int, std::vector<std::pair<int, int>>> link;  // vertex -> opposite edges
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      ++directed[{f[e], f[(e + 1) % 3]}];
      link[f[e]].push_back({f[(e + 1) % 3], f[(e + 2) % 3]});
    }
  }
  topo.closed = true;
  topo.edge_manifold = true;
  long edges = 0;
  for (const auto& [edge, count] : directed) {
    const auto rev = directed.find({edge.second, edge.first});
    const int back = rev == directed.end() ? 0 : rev->second;
    if (back == 0) topo.closed = false;
    if (count != 1 || back > 1) topo.edge_manifold = false;
    if (edge.first < edge.second || back == 0) ++edges;
  }
  // A manifold vertex link is one cycle: walk next pointers from any edge.
  topo.vertex_manifold = true;
  for (const auto& [v, segs] : link) {
    std::map<int, int> next;
    for (const auto& [a, b] : segs) {
      if (next.count(a)) topo.vertex_manifold = false;
      next[a] = b;
    }
    int cur = segs.front().first;
    std::size_t steps = 0;
    do {
      const auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
      ++steps;
    } while (cur != segs.front().first && steps <= segs.size());
    if (steps != segs.size() || cur != segs.front().first) topo.vertex_manifold = false;
  }
  // Components over faces via union-find on vertices.
  std::map<int, int> parent;
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& [v, segs] : link) parent[v] = v;
  for (const auto& f : mesh.faces) {
    parent[find(f[1])] = find(f[0]);
    parent[find(f[2])] = find(f[0]);
  }
  for (const auto& [v, p] : parent) topo.components += find(v) == v ? 1 : 0;
  topo.euler = static_cast<long>(link.size()) - edges + static_cast<long>(mesh.faces.size());
  return topo;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path = std::filesystem::temp_directory_path() /
         ("geofuse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

}  // namespace oracle
