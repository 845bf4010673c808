#include "geofuse/views/views.hpp"

#include "geofuse/geom/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace geofuse {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Nodes on each side of the centre needed along one axis.
int lattice_half_count(double half_extent, double spacing, double footprint) {
  const int inside = static_cast<int>(std::floor(half_extent / spacing + 1e-9));
  const int cover = static_cast<int>(std::ceil((half_extent - 0.5 * footprint) / spacing - 1e-9));
  return std::max({0, inside, cover});
}

// Separating-axis test between triangle (a, b, c) and the box centred at
// the origin with half extents h.
bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& h) {
  const Vec3 e[3] = {b - a, c - b, a - c};
  for (const Vec3& edge : e) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 axis = Vec3::Unit(k).cross(edge);
      const double pa = a.dot(axis), pb = b.dot(axis), pc = c.dot(axis);
      const double r = h.dot(axis.cwiseAbs());
      if (std::min({pa, pb, pc}) > r || std::max({pa, pb, pc}) < -r) return false;
    }
  }
  for (int k = 0; k < 3; ++k)
    if (std::min({a[k], b[k], c[k]}) > h[k] || std::max({a[k], b[k], c[k]}) < -h[k]) return false;
  const Vec3 n = e[0].cross(e[1]);
  const double d = n.dot(a);
  const double r = h.dot(n.cwiseAbs());
  return std::abs(d) <= r;
}

std::string format_g17(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

}  // namespace

ViewSet spherical_views(const Vec3& target, double radius, std::size_t count, double fov_deg, int width,
                        int height) {
  if (!(radius > 0.0)) throw Error("spherical views need a positive radius");
  ViewSet views;
  for (const Vec3& d : fibonacci_directions(count))
    views.emplace_back(PinholeCamera::look_at(target + radius * d, target, fov_deg, width, height));
  return views;
}

double grid_footprint(const GridViewOptions& options) {
  return 2.0 * options.height_agl * std::tan(0.5 * options.fov_deg * kDegToRad);
}

ViewSet grid_views(const Aabb& box, const GridViewOptions& options) {
  if (!box.valid()) throw Error("grid views need a non-empty bounding box");
  if (!(options.height_agl > 0.0)) throw Error("grid views need a positive height above ground");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0)) throw Error("grid overlap must lie in [0, 1)");
  const double footprint = grid_footprint(options);
  const double spacing = footprint * (1.0 - options.overlap);
  if (!(spacing > 0.0)) throw Error("grid spacing must be positive");

  const Vec3 centre = box.center();
  const Vec3 half = 0.5 * box.extent();
  const int kx = lattice_half_count(half.x(), spacing, footprint);
  const int ky = lattice_half_count(half.y(), spacing, footprint);
  const double z = box.max.z() + options.height_agl;
  const double tilt = options.oblique_angle * kDegToRad;

  ViewSet views;
  for (int ix = -kx; ix <= kx; ++ix) {
    for (int iy = -ky; iy <= ky; ++iy) {
      const Vec3 c(centre.x() + ix * spacing, centre.y() + iy * spacing, z);
      views.emplace_back(PinholeCamera::look_along(c, -Vec3::UnitZ(), options.fov_deg, options.width, options.height));
      if (options.mode != GridMode::kOblique) continue;
      for (int a = 0; a < 4; ++a) {
        const double azimuth = 0.5 * std::numbers::pi * a;
        const Vec3 d(std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth), -std::cos(tilt));
        views.emplace_back(PinholeCamera::look_along(c, d, options.fov_deg, options.width, options.height));
      }
    }
  }
  return views;
}

ViewSet load_view_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open view file " + path.string());
  ViewSet views;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (tok.size() != 9) throw Error(where + "expected 9 fields, found " + std::to_string(tok.size()));
    double v[9];
    for (int i = 0; i < 9; ++i) {
      const char* b = tok[static_cast<std::size_t>(i)].data();
      const char* e = b + tok[static_cast<std::size_t>(i)].size();
      const auto [ptr, ec] = std::from_chars(b, e, v[i]);
      if (ec != std::errc() || ptr != e || !std::isfinite(v[i]))
        throw Error(where + "field " + std::to_string(i + 1) + " is not a number: '" + tok[static_cast<std::size_t>(i)] + "'");
    }
    if (v[7] != std::floor(v[7]) || v[8] != std::floor(v[8])) throw Error(where + "image size must be integral");
    try {
      views.emplace_back(PinholeCamera::look_at(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), v[6],
                                                static_cast<int>(v[7]), static_cast<int>(v[8])));
    } catch (const Error& err) {
      throw Error(where + err.what());
    }
  }
  if (views.empty()) throw Error(path.string() + ": no views");
  return views;
}

void save_view_file(const ViewSet& views, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const Camera& cam : views) {
    const auto* pin = std::get_if<PinholeCamera>(&cam);
    if (pin == nullptr) throw Error("view files hold pinhole cameras only");
    const Vec3 target = pin->center() + pin->forward();
    out << format_g17(pin->center().x()) << ' ' << format_g17(pin->center().y()) << ' '
        << format_g17(pin->center().z()) << ' ' << format_g17(target.x()) << ' ' << format_g17(target.y()) << ' '
        << format_g17(target.z()) << ' ' << format_g17(pin->fov_deg()) << ' ' << pin->width() << ' '
        << pin->height() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

OccupancyGrid build_occupancy(const TriangleMesh& mesh, double voxel, std::size_t cell_budget) {
  if (!(voxel > 0.0)) throw Error("occupancy voxel size must be positive");
  if (mesh.faces.empty()) throw Error("cannot build an occupancy grid from an empty mesh");
  validate_mesh(mesh);
  Aabb box;
  for (const Face& f : mesh.faces)
    for (const auto v : f) box.extend(mesh.vertices[static_cast<std::size_t>(v)]);

  OccupancyGrid g;
  g.voxel = voxel;
  Eigen::Vector3i lo, dims;
  double cells = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double l = std::floor(box.min[k] / voxel);
    const double h = std::floor(box.max[k] / voxel);
    lo[k] = static_cast<int>(l);
    dims[k] = static_cast<int>(h - l) + 1;
    cells *= h - l + 1.0;
  }
  if (cells > static_cast<double>(cell_budget))
    throw Error("occupancy grid needs " + std::to_string(static_cast<long long>(cells)) + " cells, over the budget of " +
                std::to_string(cell_budget) + "; use a larger voxel size");
  g.origin = voxel * lo.cast<double>();
  g.nx = dims[0];
  g.ny = dims[1];
  g.nz = dims[2];
  g.occupied.assign(static_cast<std::size_t>(cells), 0);

  const Vec3 half = Vec3::Constant(0.5 * voxel * (1.0 + 1e-9));
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(f[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(f[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(f[2])];
    Eigen::Vector3i first, last;
    for (int k = 0; k < 3; ++k) {
      const double mn = std::min({a[k], b[k], c[k]}), mx = std::max({a[k], b[k], c[k]});
      first[k] = std::clamp(static_cast<int>(std::floor((mn - g.origin[k]) / voxel)) - 1, 0, dims[k] - 1);
      last[k] = std::clamp(static_cast<int>(std::floor((mx - g.origin[k]) / voxel)) + 1, 0, dims[k] - 1);
    }
    for (int k = first[2]; k <= last[2]; ++k)
      for (int j = first[1]; j <= last[1]; ++j)
        for (int i = first[0]; i <= last[0]; ++i) {
          const std::size_t id = g.cell(i, j, k);
          if (g.occupied[id]) continue;
          const Vec3 centre = g.voxel_center(i, j, k);
          if (triangle_box_overlap(a - centre, b - centre, c - centre, half)) g.occupied[id] = 1;
        }
  }

  g.top.assign(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny), -1);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.at(i, j, k)) g.top[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(i)] = k;
  return g;
}

void save_occupancy_layers(const OccupancyGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << g.nx << ' ' << g.ny << ' ' << g.nz << ' ' << format_g17(g.voxel) << ' ' << format_g17(g.origin.x()) << ' '
      << format_g17(g.origin.y()) << ' ' << format_g17(g.origin.z()) << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) out << (i ? " " : "") << g.top_at(i, j);
    out << '\n';
  }
  for (int k = 0; k < g.nz; ++k) {
    out << "layer " << k << '\n';
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) out << (g.at(i, j, k) ? '1' : '0');
      out << '\n';
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<CellIndex> panoramic_indices(const std::vector<std::int32_t>& top, int nx, int ny, int window) {
  if (nx <= 0 || ny <= 0 || top.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw Error("top layer size does not match the grid dimensions");
  if (window < 0) throw Error("window size must be non-negative");
  auto at = [nx](const std::vector<std::int32_t>& m, int i, int j) {
    return m[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
  };
  auto window_max = [&](const std::vector<std::int32_t>& m, int i, int j) {
    std::int32_t z = -1;
    for (int ii = std::max(0, i - window); ii <= std::min(nx - 1, i + window); ++ii)
      for (int jj = std::max(0, j - window); jj <= std::min(ny - 1, j + window); ++jj) z = std::max(z, at(m, ii, jj));
    return z;
  };

  std::vector<std::int32_t> begin(top.size());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      begin[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)] = window_max(top, i, j);

  std::vector<CellIndex> out;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::int32_t b = at(begin, i, j);
      if (b < 0) continue;
      const std::int32_t end = window_max(begin, i, j) + 1;
      for (std::int32_t k = b; k < end; ++k) out.push_back({i, j, k});
    }
  return out;
}

ViewSet place_panoramic(const OccupancyGrid& grid, int window, int lift, int ray_count) {
  if (ray_count < 1) throw Error("panoramic cameras need at least one ray");
  if (std::none_of(grid.top.begin(), grid.top.end(), [](std::int32_t z) { return z >= 0; }))
    throw Error("occupancy grid has no occupied column");
  ViewSet views;
  for (const CellIndex& c : panoramic_indices(grid.top, grid.nx, grid.ny, window))
    views.emplace_back(PanoramicCamera{grid.voxel_center(c.i, c.j, c.k + lift), ray_count});
  return views;
}

}  // namespace geofuse
