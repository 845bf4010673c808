#include "doctest.h"
#include "oracles.hpp"

#include "geofuse/views/views.hpp"

#include <cmath>
#include <fstream>

using namespace geofuse;

namespace {

const PinholeCamera& pin(const Camera& c) { return std::get<PinholeCamera>(c); }

double ray_distance(const PinholeCamera& cam, const Vec3& p) {
  const Vec3 d = p - cam.center();
  return (d - d.dot(cam.forward()) * cam.forward()).norm();
}

// Literal transcription of the placement pseudocode over a symmetric,
// border-clamped window, computing every begin before any end.
std::vector<CellIndex> trace(const std::vector<std::vector<int>>& gz, int phi) {
  const int p = static_cast<int>(gz.size()), q = static_cast<int>(gz[0].size());
  auto high = [&](const std::vector<std::vector<int>>& m, int i, int j) {
    int z = -1;
    for (int ii = i - phi; ii <= i + phi; ++ii)
      for (int jj = j - phi; jj <= j + phi; ++jj)
        if (ii >= 0 && ii < p && jj >= 0 && jj < q) z = std::max(z, m[ii][jj]);
    return z;
  };
  std::vector<std::vector<int>> begin(p, std::vector<int>(q));
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

std::vector<std::int32_t> flatten(const std::vector<std::vector<int>>& gz) {
  const int p = static_cast<int>(gz.size()), q = static_cast<int>(gz[0].size());
  std::vector<std::int32_t> top(static_cast<std::size_t>(p * q));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) top[static_cast<std::size_t>(j * p + i)] = gz[i][j];
  return top;
}

}  // namespace

TEST_CASE("spherical views") {
  const auto one = spherical_views(Vec3(1, 2, 3), 4.0, 1);
  REQUIRE(one.size() == 1);
  CHECK(pin(one[0]).center().z() == doctest::Approx(3.0));
  CHECK(ray_distance(pin(one[0]), Vec3(1, 2, 3)) <= 1e-9 * 4.0);

  const auto views = spherical_views(Vec3::Zero(), 3.0, 26);
  REQUIRE(views.size() == 26);
  double min_sep = 1e9;
  for (std::size_t a = 0; a < views.size(); ++a) {
    CHECK(ray_distance(pin(views[a]), Vec3::Zero()) <= 1e-9 * 3.0);
    CHECK(pin(views[a]).width() == 256);
    CHECK(pin(views[a]).fov_deg() == 60.0);
    for (std::size_t b = a + 1; b < views.size(); ++b) {
      const double c = pin(views[a]).center().normalized().dot(pin(views[b]).center().normalized());
      min_sep = std::min(min_sep, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI);
    }
  }
  CHECK(min_sep > 20.0);
}

TEST_CASE("grid views follow footprint arithmetic") {
  Aabb box;
  box.extend(Vec3(0, 0, 0));
  box.extend(Vec3(10, 10, 0));
  GridViewOptions o;
  o.fov_deg = 90.0;
  o.height_agl = 5.0;  // footprint 2 * 5 * tan(45 deg) = 10
  o.overlap = 0.0;
  CHECK(grid_footprint(o) == doctest::Approx(10.0));
  const auto single = grid_views(box, o);
  REQUIRE(single.size() == 1);
  CHECK(pin(single[0]).center().isApprox(Vec3(5, 5, 5)));
  CHECK(pin(single[0]).forward().isApprox(Vec3(0, 0, -1)));

  o.overlap = 0.5;
  const auto lattice = grid_views(box, o);
  CHECK(lattice.size() == 9);
  double lo = 1e9, hi = -1e9;
  for (const auto& v : lattice) {
    lo = std::min(lo, pin(v).center().x());
    hi = std::max(hi, pin(v).center().x());
  }
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(10.0));

  o.mode = GridMode::kOblique;
  o.oblique_angle = 30.0;
  const auto oblique = grid_views(box, o);
  CHECK(oblique.size() == 5 * lattice.size());
  CHECK(pin(oblique[1]).forward().z() == doctest::Approx(-std::cos(M_PI / 6)));
  CHECK(pin(oblique[1]).forward().x() == doctest::Approx(0.5));

  o.overlap = 1.0;
  CHECK_THROWS_AS(grid_views(box, o), Error);
}

TEST_CASE("view file round trip and errors") {
  oracle::TempDir dir;
  {
    std::ofstream(dir / "one.txt") << "# comment\n0 0 5 0 0 0 60 256 256\n";
  }
  const auto one = load_view_file(dir / "one.txt");
  REQUIRE(one.size() == 1);
  CHECK(pin(one[0]).center() == Vec3(0, 0, 5));
  CHECK(pin(one[0]).forward().isApprox(Vec3(0, 0, -1)));

  const auto views = spherical_views(Vec3(0.5, -1, 2), 7.0, 13, 45.0, 320, 200);
  save_view_file(views, dir / "v.txt");
  const auto back = load_view_file(dir / "v.txt");
  REQUIRE(back.size() == views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    CHECK((pin(back[i]).center() - pin(views[i]).center()).norm() <= 1e-9);
    CHECK((pin(back[i]).forward() - pin(views[i]).forward()).norm() <= 1e-9);
    CHECK(pin(back[i]).width() == 320);
    CHECK(pin(back[i]).height() == 200);
  }

  { std::ofstream(dir / "empty.txt") << "\n# nothing\n"; }
  CHECK_THROWS_WITH_AS(load_view_file(dir / "empty.txt"), doctest::Contains("no views"), Error);
  { std::ofstream(dir / "short.txt") << "0 0 5 0 0 0 60 256 256\n1 2 3\n"; }
  CHECK_THROWS_WITH_AS(load_view_file(dir / "short.txt"), doctest::Contains(":2:"), Error);
  { std::ofstream(dir / "nan.txt") << "0 0 5 0 0 zero 60 256 256\n"; }
  CHECK_THROWS_WITH_AS(load_view_file(dir / "nan.txt"), doctest::Contains(":1:"), Error);
}

TEST_CASE("occupancy grids") {
  const double voxel = 0.25;
  TriangleMesh square;
  square.vertices = {{0.01, 0.01, 0.5 * voxel}, {0.99, 0.01, 0.5 * voxel}, {0.99, 0.99, 0.5 * voxel}, {0.01, 0.99, 0.5 * voxel}};
  square.faces = {{0, 1, 2}, {0, 2, 3}};
  const OccupancyGrid flat = build_occupancy(square, voxel);
  CHECK(flat.nz == 1);
  CHECK(flat.nx == 4);
  for (int i = 0; i < flat.nx; ++i)
    for (int j = 0; j < flat.ny; ++j) {
      CHECK(flat.top_at(i, j) == 0);
      CHECK(flat.at(i, j, 0));
    }

  // Vertical wall in the plane x = 0.6, from z = 0.1 to 0.9, y in [0.1, 0.5].
  TriangleMesh wall;
  wall.vertices = {{0.6, 0.1, 0.1}, {0.6, 0.5, 0.1}, {0.6, 0.5, 0.9}, {0.6, 0.1, 0.9}, {0.1, 0.1, 0.1}};
  wall.faces = {{0, 1, 2}, {0, 2, 3}, {0, 4, 1}};
  const OccupancyGrid w = build_occupancy(wall, voxel);
  CHECK(w.origin.isApprox(Vec3(0, 0, 0)));
  const int wx = 2;  // 0.6 / 0.25
  for (int j = 0; j <= 2; ++j) CHECK(w.top_at(wx, j) == 3);
  // Column x index 0 holds only the ground triangle at z = 0.1 -> layer 0.
  CHECK(w.top_at(0, 0) == 0);
  // Columns beyond the wall footprint in y stay empty.
  CHECK(w.top_at(0, w.ny - 1) == -1);
  for (int i = 0; i < w.nx; ++i)
    for (int j = 0; j < w.ny; ++j) {
      int highest = -1;
      for (int k = 0; k < w.nz; ++k)
        if (w.at(i, j, k)) highest = k;
      CHECK(w.top_at(i, j) == highest);
      CHECK(w.top_at(i, j) < w.nz);
    }

  CHECK_THROWS_WITH_AS(build_occupancy(wall, 1e-5, 1000), doctest::Contains("larger voxel"), Error);
  CHECK_THROWS_AS(build_occupancy(TriangleMesh{}, 1.0), Error);
}

TEST_CASE("occupancy is conservative against a sampled surface") {
  const TriangleMesh sphere = oracle::icosphere(2, 1.0, Vec3(0.1, 0.2, 0.3));
  const OccupancyGrid g = build_occupancy(sphere, 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int missed = 0;
  for (const Face& f : sphere.faces) {
    for (int s = 0; s < 20; ++s) {
      double a = u(rng), b = u(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const Vec3 p = sphere.vertices[f[0]] + a * (sphere.vertices[f[1]] - sphere.vertices[f[0]]) +
                     b * (sphere.vertices[f[2]] - sphere.vertices[f[0]]);
      const Eigen::Vector3i idx = ((p - g.origin) / g.voxel).array().floor().cast<int>();
      if (!g.at(std::min(idx.x(), g.nx - 1), std::min(idx.y(), g.ny - 1), std::min(idx.z(), g.nz - 1))) ++missed;
    }
  }
  CHECK(missed == 0);
}

TEST_CASE("panoramic placement hand traces") {
  SUBCASE("flat terrain: one camera per column at the top layer") {
    const std::vector<std::vector<int>> gz(5, std::vector<int>(5, 2));
    const auto cells = panoramic_indices(flatten(gz), 5, 5, 1);
    CHECK(cells.size() == 25);
    for (const auto& c : cells) CHECK(c.k == 2);
  }
  SUBCASE("single tall column") {
    std::vector<std::vector<int>> gz(5, std::vector<int>(5, 1));
    gz[2][2] = 4;
    const auto cells = panoramic_indices(flatten(gz), 5, 5, 1);
    // 9 columns next to the tower start at 4 and end at 5; the 16 outer
    // columns start at 1 and stack up to 4.
    CHECK(cells.size() == 9 * 1 + 16 * 4);
    int stack_00 = 0;
    for (const auto& c : cells)
      if (c.i == 0 && c.j == 0) {
        CHECK(c.k == 1 + stack_00);
        ++stack_00;
      }
    CHECK(stack_00 == 4);
  }
  SUBCASE("facade step") {
    const std::vector<std::vector<int>> gz = {{0}, {0}, {0}, {5}, {5}, {5}};
    const auto cells = panoramic_indices(flatten(gz), 6, 1, 1);
    const std::vector<CellIndex> expected = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 0, 2}, {1, 0, 3}, {1, 0, 4},
                                             {1, 0, 5}, {2, 0, 5}, {3, 0, 5}, {4, 0, 5}, {5, 0, 5}};
    CHECK(cells == expected);
  }
  SUBCASE("window zero is the top layer itself") {
    const std::vector<std::vector<int>> gz = {{3, -1}, {0, 7}};
    const auto cells = panoramic_indices(flatten(gz), 2, 2, 0);
    const std::vector<CellIndex> expected = {{0, 0, 3}, {1, 0, 0}, {1, 1, 7}};
    CHECK(cells == expected);
  }
  SUBCASE("empty neighbourhoods are skipped") {
    std::vector<std::vector<int>> gz(3, std::vector<int>(3, -1));
    gz[0][0] = 2;
    CHECK(panoramic_indices(flatten(gz), 3, 3, 0).size() == 1);
    CHECK(panoramic_indices(flatten(gz), 3, 3, 1).size() == 4);
  }
}

TEST_CASE("panoramic placement matches the literal trace on random small grids") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 8), height(-1, 6), phi(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int p = size(rng), q = size(rng), w = phi(rng);
    std::vector<std::vector<int>> gz(p, std::vector<int>(q));
    for (auto& row : gz)
      for (auto& z : row) z = height(rng);
    const auto got = panoramic_indices(flatten(gz), p, q, w);
    CHECK(got == trace(gz, w));
    for (const auto& c : got) {
      int high = -1;
      for (int ii = std::max(0, c.i - w); ii <= std::min(p - 1, c.i + w); ++ii)
        for (int jj = std::max(0, c.j - w); jj <= std::min(q - 1, c.j + w); ++jj) high = std::max(high, gz[ii][jj]);
      CHECK(c.k >= high);
    }
  }
}

TEST_CASE("place_panoramic positions") {
  TriangleMesh square;
  square.vertices = {{0, 0, 0.1}, {1, 0, 0.1}, {1, 1, 0.1}, {0, 1, 0.1}};
  square.faces = {{0, 1, 2}, {0, 2, 3}};
  const OccupancyGrid g = build_occupancy(square, 0.5);
  const ViewSet raw = place_panoramic(g, 3, 0, 100);
  const ViewSet lifted = place_panoramic(g, 3, 1, 100);
  REQUIRE(raw.size() == lifted.size());
  REQUIRE(!raw.empty());
  const auto& a = std::get<PanoramicCamera>(raw[0]);
  const auto& b = std::get<PanoramicCamera>(lifted[0]);
  CHECK(a.center.isApprox(Vec3(0.25, 0.25, 0.25)));
  CHECK(b.center.isApprox(Vec3(0.25, 0.25, 0.75)));
  CHECK(a.ray_count == 100);
  CHECK(place_panoramic(g).size() == raw.size());
}
