// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "geofuse/cli/cli.hpp"
#include "geofuse/delaunay/predicates.hpp"
#include "geofuse/eval/metrics.hpp"
#include "geofuse/fusion/tsdf.hpp"
#include "geofuse/geom/mesh_io.hpp"
#include "geofuse/geom/sampling.hpp"
#include "geofuse/pipeline/reconstruct.hpp"
#include "geofuse/surface/graph_cut.hpp"
#include "geofuse/views/views.hpp"
#include "geofuse/visibility/visibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace geofuse;
namespace pr = geofuse::predicates;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 1 -------------------------------------------------------------------------

// Long-double circumsphere test that only defers to the exact oracle when
// the point is within a relative 1e-6 of the sphere.
int in_sphere_filtered(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  using L = long double;
  const Eigen::Matrix<L, 3, 1> pa = a.cast<L>(), pb = b.cast<L>(), pc = c.cast<L>(), pd = d.cast<L>();
  Eigen::Matrix<L, 3, 3> m;
  m.row(0) = (pb - pa).transpose();
  m.row(1) = (pc - pa).transpose();
  m.row(2) = (pd - pa).transpose();
  const Eigen::Matrix<L, 3, 1> rhs(0.5L * (pb - pa).squaredNorm(), 0.5L * (pc - pa).squaredNorm(),
                                   0.5L * (pd - pa).squaredNorm());
  const Eigen::Matrix<L, 3, 1> centre = pa + m.partialPivLu().solve(rhs);
  const L r2 = (pa - centre).squaredNorm();
  const L e2 = (e.cast<L>() - centre).squaredNorm();
  if (std::isfinite(static_cast<double>(r2)) && std::abs(e2 - r2) > 1e-6L * r2) return e2 < r2 ? 1 : -1;
  return oracle::in_sphere(a, b, c, d, e);
}

Outcome delaunay_correctness() {
  long violations = 0, hull_violations = 0, invariant_errors = 0, tets = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pts = oracle::uniform_box(200, 1000 + seed);
    const TetComplex c = tetrahedralize(pts);
    invariant_errors += static_cast<long>(c.check().size());
    const auto n = static_cast<std::int32_t>(c.vertex_count());
    for (std::int32_t t = 0; t < static_cast<std::int32_t>(c.tet_count()); ++t) {
      const Tet& tet = c.tet(t);
      const int k = c.infinite_slot(t);
      if (k < 0) {
        ++tets;
        for (std::int32_t v = 0; v < n; ++v) {
          if (std::find(tet.v.begin(), tet.v.end(), v) != tet.v.end()) continue;
          if (in_sphere_filtered(c.point(tet.v[0]), c.point(tet.v[1]), c.point(tet.v[2]), c.point(tet.v[3]), c.point(v)) > 0)
            ++violations;
        }
        continue;
      }
      // The finite facet of an infinite tet is a hull facet: no point lies beyond it.
      for (std::int32_t v = 0; v < n; ++v) {
        std::array<Vec3, 4> q;
        for (int j = 0; j < 4; ++j) q[j] = j == k ? c.point(v) : c.point(tet.v[j]);
        if (oracle::orient3d(q[0], q[1], q[2], q[3]) > 0) ++hull_violations;
      }
      for (int i = 0; i < 4; ++i) {
        const std::int32_t u = tet.n[i];
        if (c.tet(u).n[c.mirror_slot(t, i)] != t) ++invariant_errors;
      }
    }
  }
  return {violations == 0 && hull_violations == 0 && invariant_errors == 0,
          std::to_string(tets) + " finite tets; sphere violations " + std::to_string(violations) + ", hull " +
              std::to_string(hull_violations) + ", adjacency " + std::to_string(invariant_errors) + " (tol 0)"};
}

// 2 -------------------------------------------------------------------------

Vec3 nudge(const Vec3& p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> steps(-3, 3);
  Vec3 q = p;
  for (int k = 0; k < 3; ++k) {
    const int s = steps(rng);
    for (int i = 0; i < std::abs(s); ++i) q[k] = std::nextafter(q[k], s > 0 ? 1e300 : -1e300);
  }
  return q;
}

Outcome exact_predicates() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> expo(-8, 8);
  auto random_point = [&] {
    const double s = std::ldexp(1.0, expo(rng));
    return Vec3(s * u(rng), s * u(rng), s * u(rng));
  };
  long mismatch = 0, checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 a = random_point(), b = random_point(), c = random_point(), d = random_point(), e = random_point();
    const int o = oracle::orient3d(a, b, c, d);
    mismatch += pr::orient3d(a, b, c, d) != o;
    ++checked;
    if (o != 0) {
      mismatch += pr::in_sphere(a, b, c, d, e) != oracle::in_sphere(a, b, c, d, e);
      ++checked;
    }
  }
  long zeros = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = oracle::uniform_sphere(5, 5000 + static_cast<std::uint64_t>(i), 0.5 + i * 1e-3, Vec3(0.3, -0.2, 0.1));
    const Vec3 du = s[0] - s[1], dv = s[2] - s[1];
    std::uniform_real_distribution<double> w(-2, 2);
    Vec3 plane[4];
    for (auto& p : plane) {
      const double x = w(rng), y = w(rng);
      p = i % 2 ? nudge(s[1] + x * du + y * dv, rng) : s[1] + x * du + y * dv;
    }
    const int o = oracle::orient3d(plane[0], plane[1], plane[2], plane[3]);
    zeros += o == 0;
    mismatch += pr::orient3d(plane[0], plane[1], plane[2], plane[3]) != o;
    const Vec3 e = i % 2 ? nudge(s[4], rng) : s[4];
    ++checked;
    if (oracle::orient3d(s[0], s[1], s[2], s[3]) != 0) {
      const int r = oracle::in_sphere(s[0], s[1], s[2], s[3], e);
      zeros += r == 0;
      mismatch += pr::in_sphere(s[0], s[1], s[2], s[3], e) != r;
      ++checked;
    }
  }
  // Exactly degenerate lattice inputs: coplanar points on x + 2y - z = k and
  // points on the integer sphere of radius 3.
  std::vector<Vec3> shell;
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y)
      for (int z = -3; z <= 3; ++z)
        if (x * x + y * y + z * z == 9) shell.emplace_back(x, y, z);
  std::uniform_int_distribution<int> coord(-20, 20);
  std::uniform_int_distribution<std::size_t> pick(0, shell.size() - 1);
  for (int i = 0; i < 1000; ++i) {
    Vec3 q[4];
    const int k = coord(rng);
    for (auto& p : q) {
      const int x = coord(rng), y = coord(rng);
      p = Vec3(x, y, x + 2 * y - k) * 0.125;
    }
    const int o = oracle::orient3d(q[0], q[1], q[2], q[3]);
    zeros += o == 0;
    mismatch += pr::orient3d(q[0], q[1], q[2], q[3]) != o;
    ++checked;
    const Vec3 s0 = shell[pick(rng)], s1 = shell[pick(rng)], s2 = shell[pick(rng)], s3 = shell[pick(rng)];
    const Vec3 e = i % 3 ? shell[pick(rng)] : Vec3(coord(rng), coord(rng), coord(rng)) * 0.25;
    if (oracle::orient3d(s0, s1, s2, s3) != 0) {
      const int r = oracle::in_sphere(s0, s1, s2, s3, e);
      zeros += r == 0;
      mismatch += pr::in_sphere(s0, s1, s2, s3, e) != r;
      ++checked;
    }
  }
  return {mismatch == 0, std::to_string(checked) + " evaluations (" + std::to_string(zeros) +
                             " exact zeros), mismatches " + std::to_string(mismatch) + " (tol 0)"};
}

// 3 -------------------------------------------------------------------------

double brute_min_cut(std::size_t n, const std::vector<std::tuple<int, int, double>>& edges, int s, int t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    double cut = 0;
    for (const auto& [u, v, c] : edges)
      if ((mask >> u & 1u) && !(mask >> v & 1u)) cut += c;
    best = std::min(best, cut);
  }
  return best;
}

Outcome max_flow_duality() {
  std::mt19937_64 rng(303);
  int wrong = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<std::tuple<int, int, double>> edges;
    FlowNetwork net(n);
    const std::size_t m = rng() % (n * n);
    for (std::size_t e = 0; e < m; ++e) {
      const int u = static_cast<int>(rng() % n), v = static_cast<int>(rng() % n);
      if (u == v) continue;
      // Dyadic capacities keep every partial sum exact.
      const double c = static_cast<double>(rng() % 160) / 8.0;
      edges.emplace_back(u, v, c);
      net.add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v), c);
    }
    const double flow = net.max_flow(0, n - 1);
    wrong += flow != brute_min_cut(n, edges, 0, static_cast<int>(n - 1));
    wrong += net.cut_capacity(net.source_side()) != flow;
  }

  double worst_gap = 0.0;
  struct Run {
    std::vector<Vec3> points;
    ViewSet views;
  };
  std::vector<Run> runs;
  runs.push_back({oracle::uniform_sphere(2000, 31), spherical_views(Vec3::Zero(), 3.0, 26)});
  runs.push_back({oracle::uniform_box(1500, 32), spherical_views(Vec3::Zero(), 4.0, 12)});
  std::vector<Vec3> blob = oracle::uniform_sphere(1500, 33, 1.0);
  for (const Vec3& p : oracle::uniform_sphere(800, 34, 0.4, Vec3(1.1, 0, 0))) blob.push_back(p);
  runs.push_back({blob, spherical_views(Vec3(0.3, 0, 0), 3.5, 20)});
  for (const auto& run : runs) {
    const auto r = reconstruct(run.points, run.views);
    worst_gap = std::max(worst_gap, std::abs(r.flow - r.cut_capacity) / std::max(1.0, r.flow));
  }
  return {wrong == 0 && worst_gap <= 1e-9, "200 random graphs, mismatches " + std::to_string(wrong) +
                                               " (tol 0); production duality gap " + num(worst_gap) + " (tol 1e-9 rel)"};
}

// 4 -------------------------------------------------------------------------

Outcome baseline_reduction() {
  const auto pts = oracle::uniform_sphere(1000, 12);
  const TetComplex complex = tetrahedralize(pts);
  const ViewSet views = spherical_views(Vec3::Zero(), 3.0, 26);
  std::vector<std::vector<std::int32_t>> visible;
  for (const auto& v : views) visible.push_back(hpr_visible(pts, camera_center(v)));
  const auto sights = collect_lines_of_sight(views, visible);
  EnergyParams avw;
  avw.lambda_avw = 0.0;
  EnergyParams base = avw;
  base.weighting = VisibilityWeighting::kBaseline;
  const StGraph a = build_st_graph(complex, sights, avw);
  const StGraph b = build_st_graph(complex, sights, base);
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
  };
  const bool ok = same(a.sink, b.sink) && same(a.source, b.source) && same(a.facet, b.facet) && a.tied == b.tied &&
                  std::memcmp(&a.sentinel, &b.sentinel, sizeof(double)) == 0;
  return {ok, std::to_string(sights.size()) + " sights, " + std::to_string(a.tet_count) +
                  " tets; capacities bitwise " + (ok ? "identical" : "different") + " (tol 0)"};
}

// 5 -------------------------------------------------------------------------

Outcome end_to_end() {
  const auto points = oracle::uniform_sphere(10000, 7);
  const auto views = spherical_views(Vec3::Zero(), 3.0, 26);
  const auto start = std::chrono::steady_clock::now();
  const auto result = reconstruct(points, views);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto topo = oracle::mesh_topology(result.mesh);
  const auto recon = sample_surface(result.mesh);
  const auto ref = oracle::uniform_sphere(100000, 8);
  const double cd = chamfer_distance(recon, ref);
  const auto fs = f_score(recon, ref, 0.02);
  const bool ok = topo.closed_manifold() && topo.components == 1 && topo.genus() == 0 && cd <= 0.01 &&
                  fs.fscore >= 0.95 && seconds <= 120.0;
  return {ok, std::string(topo.closed_manifold() ? "closed manifold" : "NOT closed manifold") + ", genus " +
                  std::to_string(topo.genus()) + ", chamfer " + num(cd) + " (<= 0.01), F@0.02 " + num(fs.fscore) +
                  " (>= 0.95), " + num(seconds) + " s (<= 120)"};
}

// 6 -------------------------------------------------------------------------

Outcome hand_graph() {
  const auto fx = oracle::chain_fixture();
  const TetComplex complex = TetComplex::from_tets(fx.points, fx.tets);
  int bad = static_cast<int>(complex.check().size());
  for (double lambda : {0.0, 0.5, 1.0}) {
    EnergyParams params;
    params.alpha_max = 32;
    params.sigma_soft = 2.0;
    params.lambda_avw = lambda;
    params.lambda_ql = 0;
    const StGraph g = build_st_graph(complex, {{fx.target, fx.center}}, params);
    oracle::TempDir tmp;
    g.dump(tmp / "graph.txt");
    const auto dump = oracle::parse_graph_dump(tmp / "graph.txt");
    const auto hand = oracle::hand_chain_graph(complex, fx, 32, 2.0, lambda);
    oracle::EdgeMap finite;
    std::set<long> tied;
    for (const auto& [key, cap] : dump.edges) {
      if (key.first == -1 && cap == dump.sentinel) {
        tied.insert(key.second);
      } else {
        finite[key] = cap;
      }
    }
    bad += finite != hand.edges;
    bad += tied != std::set<long>(hand.tied.begin(), hand.tied.end());
    bad += dump.nodes != complex.tet_count() + 2;
    bad += !(dump.sentinel > hand.finite_total);
  }
  return {bad == 0, "3 energy settings, mismatching dumps " + std::to_string(bad) + " (tol 0)"};
}

// 7 -------------------------------------------------------------------------

Outcome hpr_sanity() {
  const auto pts = oracle::uniform_sphere(2000, 17);
  const ViewSet views = spherical_views(Vec3::Zero(), 3.0, 26);
  long agree = 0, total = 0;
  double worst = 1.0;
  for (const auto& view : views) {
    const Vec3 eye = camera_center(view);
    const auto vis = hpr_visible(pts, eye);
    const std::set<std::int32_t> seen(vis.begin(), vis.end());
    long here = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      // The segment to a point on the unit sphere stays outside iff p . (eye - p) >= 0.
      const bool visible = pts[i].dot(eye - pts[i]) >= 0;
      here += visible == (seen.count(static_cast<std::int32_t>(i)) == 1);
    }
    agree += here;
    total += static_cast<long>(pts.size());
    worst = std::min(worst, static_cast<double>(here) / static_cast<double>(pts.size()));
  }
  const double rate = static_cast<double>(agree) / static_cast<double>(total);
  return {rate >= 0.95, "agreement " + num(rate) + " over 26 views (>= 0.95), worst view " + num(worst)};
}

// 8 -------------------------------------------------------------------------

TriangleMesh x_plane(double x0, double h = 2.0) {
  TriangleMesh m;
  m.vertices = {Vec3(x0, -h, -h), Vec3(x0, h, -h), Vec3(x0, h, h), Vec3(x0, -h, h)};
  m.faces = {{0, 2, 1}, {0, 3, 2}};
  return m;
}

std::optional<RaySample> sample_against(const Bvh& bvh, const Vec3& origin, const Vec3& dir, double m) {
  Ray ray;
  ray.origin = origin;
  ray.direction = dir;
  const auto hit = bvh.ray_cast(ray);
  if (!hit) return std::nullopt;
  return RaySample{origin, dir, hit->t, adaptive_neg_band(bvh, *hit, ray, m), m};
}

std::optional<double> zero_crossing_x(const SparseTsdfGrid& grid, int j, int k) {
  std::vector<std::pair<int, double>> column;
  for (const auto& [key, v] : grid.voxels())
    if (key.j == j && key.k == k) column.push_back({key.i, v.d});
  std::sort(column.begin(), column.end());
  for (std::size_t n = 0; n + 1 < column.size(); ++n) {
    const auto [i0, d0] = column[n];
    const auto [i1, d1] = column[n + 1];
    if (i1 != i0 + 1 || !(d0 >= 0 && d1 < 0)) continue;
    return grid.center({i0, j, k}).x() + grid.voxel() * d0 / (d0 - d1);
  }
  return std::nullopt;
}

Outcome tsdf_fusion() {
  const double voxel = 0.05, m = 0.5, delta = 0.2;
  const Bvh a(x_plane(0.0)), b(x_plane(delta));
  double worst = 0.0;
  bool found = true;
  for (const auto& [ca, cb] : {std::pair{1.0, 1.0}, std::pair{3.0, 1.0}, std::pair{1.0, 9.0}}) {
    SparseTsdfGrid grid(voxel, m);
    for (int j = -4; j < 4; ++j)
      for (int k = -4; k < 4; ++k) {
        const Vec3 o(-3.0, (j + 0.5) * voxel, (k + 0.5) * voxel);
        integrate_ray(grid, *sample_against(a, o, Vec3::UnitX(), m), ca);
        integrate_ray(grid, *sample_against(b, o, Vec3::UnitX(), m), cb);
      }
    const double expect = cb * delta / (ca + cb);
    for (int j = -4; j < 4; ++j)
      for (int k = -4; k < 4; ++k) {
        const auto x = zero_crossing_x(grid, j, k);
        if (!x) {
          found = false;
          continue;
        }
        worst = std::max(worst, std::abs(*x - expect));
      }
  }

  const TriangleMesh scene = merge_meshes({oracle::icosphere(2, 1.0), x_plane(1.3)});
  const Bvh bvh(scene);
  std::vector<std::pair<RaySample, double>> samples;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> weight(0.5, 4.0);
  for (const Vec3& origin : {Vec3(3, 0.2, 0.1), Vec3(-2.5, 1, 0.5), Vec3(0.3, 2.8, -0.4)})
    for (const Vec3& dir : fibonacci_directions(3000))
      if (const auto s = sample_against(bvh, origin, dir, 0.3)) samples.push_back({*s, weight(rng)});
  SparseTsdfGrid forward(0.1, 0.3), shuffled(0.1, 0.3);
  for (const auto& [s, w] : samples) integrate_ray(forward, s, w);
  std::shuffle(samples.begin(), samples.end(), rng);
  for (const auto& [s, w] : samples) integrate_ray(shuffled, s, w);
  double order = forward.size() == shuffled.size() ? 0.0 : 1e300;
  for (const auto& [key, v] : forward.voxels()) {
    const TsdfVoxel* u = shuffled.find(key);
    order = u ? std::max({order, std::abs(u->d - v.d), std::abs(u->w - v.w)}) : 1e300;
  }
  return {found && worst <= 0.5 * voxel && order <= 1e-6,
          "weights (1,1) (3,1) (1,9): worst crossing error " + num(worst) + " (<= " + num(0.5 * voxel) +
              "); order difference " + num(order) + " (<= 1e-6)"};
}

// 9 -------------------------------------------------------------------------

Outcome conflation_self_test() {
  const double voxel = 0.05;
  const TriangleMesh clean = oracle::icosphere(4, 1.0);
  TriangleMesh jittered = clean;
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(-1, 1);
  double max_jitter = 0.0;
  for (Vec3& p : jittered.vertices) {
    Vec3 d;
    do d = Vec3(u(rng), u(rng), u(rng));
    while (d.norm() > 1.0);
    d *= 0.25 * voxel;
    max_jitter = std::max(max_jitter, d.norm());
    p += d;
  }
  ViewSet cams;
  for (const Vec3& d : fibonacci_directions(20)) cams.emplace_back(PanoramicCamera{2.5 * d, 20000});
  ConflateOptions opts;
  opts.voxel = voxel;
  const auto grid = conflate_sources({{clean, 1.0, std::nullopt}, {jittered, 1.0, std::nullopt}}, cams, opts);
  const auto mesh = marching_cubes(grid);

  const auto samples = sample_surface(mesh);
  const double mean = mean_distance(samples, Bvh(clean));
  const auto fs = f_score(samples, sample_surface(clean), voxel);
  std::map<std::pair<int, int>, int> edge_faces;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) ++edge_faces[{std::min(f[e], f[(e + 1) % 3]), std::max(f[e], f[(e + 1) % 3])}];
  int crowded = 0;
  for (const auto& [e, count] : edge_faces) crowded += count > 2;
  const bool ok = !mesh.empty() && max_jitter <= 0.25 * voxel && mean <= voxel && fs.fscore >= 0.99 && crowded == 0;
  return {ok, "jitter " + num(max_jitter) + " (<= " + num(0.25 * voxel) + "), mean distance " + num(mean) + " (<= " +
                  num(voxel) + "), F@" + num(voxel) + " " + num(fs.fscore) + " (>= 0.99), edges on > 2 faces " +
                  std::to_string(crowded) + " (tol 0)"};
}

// 10 ------------------------------------------------------------------------

using Heights = std::vector<std::vector<int>>;

// Placement pseudocode written out literally: begin over a clamped window of
// the top layer, then end over the same window of begin.
std::vector<CellIndex> literal_trace(const Heights& gz, int phi) {
  const int p = static_cast<int>(gz.size()), q = static_cast<int>(gz[0].size());
  auto high = [&](const Heights& m, int i, int j) {
    int z = -1;
    for (int ii = i - phi; ii <= i + phi; ++ii)
      for (int jj = j - phi; jj <= j + phi; ++jj)
        if (ii >= 0 && ii < p && jj >= 0 && jj < q) z = std::max(z, m[ii][jj]);
    return z;
  };
  Heights begin(p, std::vector<int>(q));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) begin[i][j] = high(gz, i, j);
  std::vector<CellIndex> out;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) {
      if (begin[i][j] < 0) continue;
      const int end = high(begin, i, j) + 1;
      for (int k = begin[i][j]; k < end; ++k) out.push_back({i, j, k});
    }
  return out;
}

std::vector<std::int32_t> flatten(const Heights& gz) {
  const int p = static_cast<int>(gz.size()), q = static_cast<int>(gz[0].size());
  std::vector<std::int32_t> top(static_cast<std::size_t>(p * q));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) top[static_cast<std::size_t>(j * p + i)] = gz[i][j];
  return top;
}

Outcome placement_fidelity() {
  struct Fixture {
    std::string name;
    Heights gz;
    int phi;
    std::optional<std::vector<CellIndex>> expected;
  };
  std::vector<Fixture> fixtures;
  {
    std::vector<CellIndex> flat;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) flat.push_back({i, j, 3});
    fixtures.push_back({"flat 8x8", Heights(8, std::vector<int>(8, 3)), 1, flat});
  }
  fixtures.push_back({"facade", {{0}, {0}, {0}, {5}, {5}, {5}}, 1,
                      std::vector<CellIndex>{{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 0, 2}, {1, 0, 3}, {1, 0, 4},
                                             {1, 0, 5}, {2, 0, 5}, {3, 0, 5}, {4, 0, 5}, {5, 0, 5}}});
  fixtures.push_back({"window 0", {{3, -1}, {0, 7}}, 0, std::vector<CellIndex>{{0, 0, 3}, {1, 0, 0}, {1, 1, 7}}});
  {
    Heights tower(5, std::vector<int>(5, 1));
    tower[2][2] = 4;
    fixtures.push_back({"tower", tower, 1, std::nullopt});
    Heights sparse(3, std::vector<int>(3, -1));
    sparse[0][0] = 2;
    fixtures.push_back({"sparse", sparse, 1, std::nullopt});
    Heights stairs(8, std::vector<int>(8));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) stairs[i][j] = i;
    fixtures.push_back({"stairs", stairs, 2, std::nullopt});
  }
  int bad = 0;
  std::string which;
  for (const auto& f : fixtures) {
    const auto got = panoramic_indices(flatten(f.gz), static_cast<int>(f.gz.size()), static_cast<int>(f.gz[0].size()), f.phi);
    if (got != literal_trace(f.gz, f.phi) || (f.expected && got != *f.expected)) {
      ++bad;
      which += " " + f.name;
    }
  }
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<int> size(1, 8), height(-1, 6), phi(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int p = size(rng), q = size(rng), w = phi(rng);
    Heights gz(p, std::vector<int>(q));
    for (auto& row : gz)
      for (auto& z : row) z = height(rng);
    bad += panoramic_indices(flatten(gz), p, q, w) != literal_trace(gz, w);
  }
  return {bad == 0, std::to_string(fixtures.size()) + " hand fixtures + 300 random grids <= 8x8, mismatches " +
                        std::to_string(bad) + which + " (tol 0)"};
}

// 11 ------------------------------------------------------------------------

Outcome determinism() {
  oracle::TempDir dir;
  PointCloud cloud;
  cloud.positions = oracle::uniform_sphere(3000, 21);
  save_point_cloud(cloud, dir / "sphere.ply");
  TriangleMesh terrain;
  terrain.vertices = {Vec3(-6, -6, 0), Vec3(6, -6, 0), Vec3(6, 6, 0), Vec3(-6, 6, 0)};
  terrain.faces = {{0, 1, 2}, {0, 2, 3}};
  save_mesh(merge_meshes({terrain, oracle::cube_mesh(-1, 1)}), dir / "a.ply");
  TriangleMesh lifted = terrain;
  for (Vec3& v : lifted.vertices) v.z() += 0.3;
  save_mesh(merge_meshes({lifted, oracle::cube_mesh(-1.2, 1.1)}), dir / "b.ply");

  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  const std::string in = (dir / "sphere.ply").string();
  int failures = 0;
  for (const char* threads : {"1", "4"}) {
    failures += run({"reconstruct", in, "--views", "spherical:26", "--seed", "42", "--threads", threads, "-o",
                     (dir / (std::string("r") + threads + ".ply")).string()}) != 0;
    failures += run({"conflate", (dir / "a.ply").string(), (dir / "b.ply").string(), "--voxel", "0.25", "--weight",
                     "3", "--weight", "1", "--rays-per-camera", "2000", "--seed", "42", "--threads", threads, "-o",
                     (dir / (std::string("c") + threads + ".ply")).string()}) != 0;
  }
  const std::string r1 = slurp(dir / "r1.ply"), c1 = slurp(dir / "c1.ply");
  const bool same_r = !r1.empty() && r1 == slurp(dir / "r4.ply");
  const bool same_c = !c1.empty() && c1 == slurp(dir / "c4.ply");
  return {failures == 0 && same_r && same_c,
          std::string("reconstruct ") + (same_r ? "identical" : "DIFFERENT") + " (" + std::to_string(r1.size()) +
              " bytes), conflate " + (same_c ? "identical" : "DIFFERENT") + " (" + std::to_string(c1.size()) +
              " bytes), failed runs " + std::to_string(failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"delaunay empty circumspheres", delaunay_correctness},
      {"exact predicates", exact_predicates},
      {"max-flow oracle and duality", max_flow_duality},
      {"baseline reduction at lambda_avw=0", baseline_reduction},
      {"sphere end to end", end_to_end},
      {"hand-evaluated graph", hand_graph},
      {"hpr vs occlusion oracle", hpr_sanity},
      {"weighted tsdf fusion", tsdf_fusion},
      {"conflation self-test", conflation_self_test},
      {"panoramic placement traces", placement_fidelity},
      {"byte determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail << " ["
              << num(s) << " s]" << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
