#include "geofuse/fusion/tsdf.hpp"

#include "geofuse/geom/sampling.hpp"
#include "geofuse/util/parallel.hpp"
#include "mc_tables.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

namespace geofuse {

SparseTsdfGrid::SparseTsdfGrid(double voxel, double band) : voxel_(voxel), band_(band) {
  if (!(voxel > 0) || !std::isfinite(voxel)) throw Error("voxel size must be positive");
  if (!(band > 0) || !std::isfinite(band)) throw Error("TSDF band must be positive");
}

VoxelKey SparseTsdfGrid::key_of(const Vec3& p) const {
  const Vec3 c = (p / voxel_).array().floor();
  constexpr double kLimit = 1e9;
  if (!(c.cwiseAbs().maxCoeff() < kLimit)) throw Error("point outside the voxel index range");
  return {static_cast<std::int32_t>(c.x()), static_cast<std::int32_t>(c.y()), static_cast<std::int32_t>(c.z())};
}

Vec3 SparseTsdfGrid::center(const VoxelKey& key) const {
  return voxel_ * Vec3(key.i + 0.5, key.j + 0.5, key.k + 0.5);
}

const TsdfVoxel* SparseTsdfGrid::find(const VoxelKey& key) const {
  const auto it = voxels_.find(key);
  return it == voxels_.end() ? nullptr : &it->second;
}

void SparseTsdfGrid::update(const VoxelKey& key, double d, double w) {
  if (!(w > 0)) return;
  TsdfVoxel& v = voxels_[key];
  const double total = v.w + w;
  v.d = (v.w * v.d + w * d) / total;
  v.w = total;
}

std::vector<VoxelKey> SparseTsdfGrid::sorted_keys() const {
  std::vector<VoxelKey> keys;
  keys.reserve(voxels_.size());
  for (const auto& [key, v] : voxels_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

double adaptive_neg_band(const Bvh& bvh, const Hit& hit, const Ray& ray, double m) {
  Ray next;
  next.origin = hit.point;
  next.direction = ray.direction;
  next.min_range = bvh.ray_epsilon();
  next.max_range = 2.0 * m;
  const auto behind = bvh.ray_cast(next);
  if (!behind || !(behind->t < 2.0 * m)) return m;
  return std::min(m, 0.5 * behind->t);
}

void integrate_ray(SparseTsdfGrid& grid, const RaySample& s, double weight) {
  const double t_begin = std::max(0.0, s.hit - s.band);
  const double t_end = s.hit + s.neg_band;
  const double step = 0.5 * grid.voxel();
  const auto steps = static_cast<std::size_t>(std::floor((t_end - t_begin) / step));
  std::optional<VoxelKey> last;
  for (std::size_t n = 0; n <= steps + 1; ++n) {
    const double t = std::min(t_begin + static_cast<double>(n) * step, t_end);
    const VoxelKey key = grid.key_of(s.origin + t * s.direction);
    if (last && *last == key) continue;
    last = key;
    const double tc = (grid.center(key) - s.origin).dot(s.direction);
    if (tc < s.hit - s.band || tc > t_end) continue;
    grid.update(key, truncated_distance(s.hit, tc, s.neg_band, s.band), weight);
  }
}

SparseTsdfGrid conflate_sources(const std::vector<FusionSource>& sources, const ViewSet& cameras,
                                const ConflateOptions& options) {
  if (sources.empty()) throw Error("conflate: no sources");
  const double band = options.band.value_or(3.0 * options.voxel);
  SparseTsdfGrid grid(options.voxel, band);

  std::vector<Bvh> bvhs;
  std::vector<double> bands;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const FusionSource& src = sources[k];
    const std::string name = "source " + std::to_string(k);
    if (!(src.weight > 0) || !std::isfinite(src.weight)) throw Error(name + ": weight must be positive");
    const double mk = src.band.value_or(band);
    if (!(mk > options.voxel) || mk > band) throw Error(name + ": band must lie in (voxel, " + std::to_string(band) + "]");
    if (src.mesh.faces.empty()) throw Error(name + ": empty mesh");
    validate_mesh(src.mesh);
    bvhs.emplace_back(src.mesh);
    bands.push_back(mk);
  }

  std::vector<PanoramicCamera> pans;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const auto* pan = std::get_if<PanoramicCamera>(&cameras[c]);
    if (!pan) throw Error("conflate: camera " + std::to_string(c) + " is not panoramic");
    if (pan->ray_count <= 0) throw Error("conflate: camera " + std::to_string(c) + " has no rays");
    pans.push_back(*pan);
  }
  std::map<int, std::vector<Vec3>> directions;
  for (const auto& pan : pans) {
    if (!directions.count(pan.ray_count)) {
      directions.emplace(pan.ray_count, fibonacci_directions(static_cast<std::size_t>(pan.ray_count)));
    }
  }

  struct Tagged {
    std::uint32_t source;
    RaySample sample;
  };
  const std::size_t chunk = 4 * static_cast<std::size_t>(resolve_threads(options.threads));
  std::size_t hits = 0;
  for (std::size_t first = 0; first < pans.size(); first += chunk) {
    const std::size_t count = std::min(chunk, pans.size() - first);
    std::vector<std::vector<Tagged>> batch(count);
    parallel_for(count, options.threads, [&](std::size_t c) {
      const PanoramicCamera& pan = pans[first + c];
      const auto& dirs = directions.at(pan.ray_count);
      for (std::size_t k = 0; k < bvhs.size(); ++k) {
        for (const Vec3& dir : dirs) {
          Ray ray;
          ray.origin = pan.center;
          ray.direction = dir;
          const auto hit = bvhs[k].ray_cast(ray);
          if (!hit) continue;
          RaySample s;
          s.origin = pan.center;
          s.direction = dir;
          s.hit = hit->t;
          s.band = bands[k];
          s.neg_band = adaptive_neg_band(bvhs[k], *hit, ray, bands[k]);
          batch[c].push_back({static_cast<std::uint32_t>(k), s});
        }
      }
    });
    for (const auto& samples : batch) {
      hits += samples.size();
      for (const auto& [k, s] : samples) integrate_ray(grid, s, sources[k].weight);
    }
  }
  if (hits == 0) spdlog::warn("conflate: no camera ray hit any source; the grid is empty");
  spdlog::info("conflate: {} cameras, {} ray hits, {} voxels", pans.size(), hits, grid.size());
  return grid;
}

namespace {

// Corner offsets in table order and the corner pair of each table edge.
constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};
constexpr std::array<std::array<int, 2>, 12> kEdge = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct EdgeKey {
  VoxelKey base;
  int axis;
  bool operator<(const EdgeKey& o) const { return base == o.base ? axis < o.axis : base < o.base; }
};

}  // namespace

TriangleMesh marching_cubes(const SparseTsdfGrid& grid) {
  TriangleMesh mesh;
  std::map<EdgeKey, std::int32_t> welded;
  for (const VoxelKey& key : grid.sorted_keys()) {
    std::array<VoxelKey, 8> corner;
    std::array<double, 8> value;
    bool complete = true;
    int cube = 0;
    for (int c = 0; c < 8 && complete; ++c) {
      corner[c] = {key.i + kCorner[c][0], key.j + kCorner[c][1], key.k + kCorner[c][2]};
      const TsdfVoxel* v = grid.find(corner[c]);
      if (!v) {
        complete = false;
        break;
      }
      value[c] = v->d;
      if (value[c] < 0) cube |= 1 << c;
    }
    if (!complete || mc::kEdgeTable[cube] == 0) continue;

    std::array<std::int32_t, 12> vertex{};
    for (int e = 0; e < 12; ++e) {
      if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
      // Canonical direction: from the lower lattice corner.
      int a = kEdge[e][0], b = kEdge[e][1];
      if (corner[b] < corner[a]) std::swap(a, b);
      int axis = 0;
      while (kCorner[a][axis] == kCorner[b][axis]) ++axis;
      const EdgeKey ek{corner[a], axis};
      auto it = welded.find(ek);
      if (it == welded.end()) {
        const double mu = value[a] / (value[a] - value[b]);
        const Vec3 pa = grid.center(corner[a]);
        const Vec3 pb = grid.center(corner[b]);
        it = welded.emplace(ek, static_cast<std::int32_t>(mesh.vertices.size())).first;
        mesh.vertices.push_back(pa + mu * (pb - pa));
      }
      vertex[e] = it->second;
    }
    const auto& tri = mc::kTriTable[cube];
    for (int i = 0; tri[i] >= 0; i += 3) {
      const Face f{vertex[tri[i]], vertex[tri[i + 2]], vertex[tri[i + 1]]};
      if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
      mesh.faces.push_back(f);
    }
  }
  return mesh;
}

void save_grid(const SparseTsdfGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (const VoxelKey& key : grid.sorted_keys()) {
    const TsdfVoxel& v = *grid.find(key);
    out << key.i << ' ' << key.j << ' ' << key.k << ' ' << v.d << ' ' << v.w << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace geofuse
