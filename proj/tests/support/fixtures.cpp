#include "fixtures.hpp"

#include "oracles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace oracle {

ChainFixture chain_fixture() {
  ChainFixture fx;
  fx.points = {
      // 0-2: triangle U in z = 2 around the axis
      Vec3(2, 0, 2),
      Vec3(-2, 2, 2),
      Vec3(-2, -2, 2),
      Vec3(0, 0, 4),      // 3 target
      Vec3(2, 0, 0),      // 4 q
      Vec3(0, 0, -4),     // 5 r
      Vec3(0.5, 0.3, 6),  // 6 apex above the target
  };
  // A = (U, target); B = (U, q) is left by the axis at z = 1 through face
  // (q, u2, u3); C = (q, u2, u3, r) contains the origin. The fan above the
  // target subdivides conv(U, apex).
  fx.tets = {{0, 1, 2, 3}, {0, 1, 2, 4}, {4, 1, 2, 5}, {0, 1, 3, 6}, {1, 2, 3, 6}, {2, 0, 3, 6}};
  return fx;
}

GraphDump parse_graph_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  GraphDump dump;
  std::string line;
  auto node = [](const std::string& s) -> long {
    if (s == "s") return -1;
    if (s == "t") return -2;
    return std::stol(s);
  };
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string a, b;
    ss >> a;
    if (a == "nodes") {
      ss >> dump.nodes;
    } else if (a == "sentinel") {
      ss >> dump.sentinel;
    } else if (!a.empty()) {
      double cap = 0;
      ss >> b >> cap;
      dump.edges[{node(a), node(b)}] += cap;
    }
  }
  return dump;
}

namespace {

bool inside_closed(const geofuse::TetComplex& c, std::int32_t t, const Vec3& p) {
  const auto& v = c.tet(t).v;
  const Vec3 &a = c.point(v[0]), &b = c.point(v[1]), &d = c.point(v[2]), &e = c.point(v[3]);
  const int s = orient3d(a, b, d, e);
  return orient3d(p, b, d, e) * s >= 0 && orient3d(a, p, d, e) * s >= 0 && orient3d(a, b, p, e) * s >= 0 &&
         orient3d(a, b, d, p) * s >= 0;
}

}  // namespace

HandGraph hand_chain_graph(const geofuse::TetComplex& complex, const ChainFixture& fx, double alpha_max,
                           double sigma, double lambda_avw) {
  auto alpha = [&](double d) { return alpha_max * (1.0 - std::exp(-(d * d) / (2.0 * sigma * sigma))); };
  const Vec3 target = fx.points[static_cast<std::size_t>(fx.target)];
  const Vec3 dir = (target - fx.center).normalized();  // +z

  // Tet behind the target: the finite one containing a point just past it.
  std::int32_t behind = -1;
  for (std::int32_t t = 0; t < static_cast<std::int32_t>(fx.tets.size()); ++t) {
    if (inside_closed(complex, t, target + 1e-3 * dir)) behind = t;
  }
  if (behind < 0) throw std::runtime_error("chain fixture: no tet behind the target");

  // Inward normals of its faces through the target; gamma mixes the best
  // cosine with the ray.
  double best = 0.0;
  const auto& v = fx.tets[static_cast<std::size_t>(behind)];
  Vec3 centroid = Vec3::Zero();
  for (auto i : v) centroid += fx.points[static_cast<std::size_t>(i)] / 4.0;
  for (int skip = 0; skip < 4; ++skip) {
    if (v[static_cast<std::size_t>(skip)] == fx.target) continue;
    std::vector<Vec3> f;
    for (int k = 0; k < 4; ++k)
      if (k != skip) f.push_back(fx.points[static_cast<std::size_t>(v[static_cast<std::size_t>(k)])]);
    Vec3 n = (f[1] - f[0]).cross(f[2] - f[0]).normalized();
    if (n.dot(centroid - f[0]) < 0) n = -n;
    best = std::max(best, n.dot(dir));
  }
  const double gamma = (1.0 - lambda_avw) + lambda_avw * std::min(best, 1.0);

  HandGraph hand;
  hand.edges[{fx.c, fx.b}] = gamma * alpha(fx.d_cb);
  hand.edges[{fx.b, fx.a}] = gamma * alpha(fx.d_ba);
  hand.edges[{behind, -2}] = gamma * alpha(sigma);
  for (const auto& [k, cap] : hand.edges) hand.finite_total += cap;
  hand.tied.push_back(fx.c);
  for (std::int32_t t = 0; t < static_cast<std::int32_t>(complex.tet_count()); ++t) {
    if (complex.is_infinite(t)) hand.tied.push_back(t);
  }
  return hand;
}

}  // namespace oracle
