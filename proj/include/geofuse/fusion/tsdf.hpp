#pragma once

#include "geofuse/geom/bvh.hpp"
#include "geofuse/geom/camera.hpp"

#include <algorithm>
#include <filesystem>
#include <unordered_map>

namespace geofuse {

struct VoxelKey {
  std::int32_t i = 0, j = 0, k = 0;
  bool operator==(const VoxelKey&) const = default;
  bool operator<(const VoxelKey& o) const {
    if (k != o.k) return k < o.k;
    if (j != o.j) return j < o.j;
    return i < o.i;
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& key) const noexcept {
    auto h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.i));
    h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(key.j);
    h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(key.k);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct TsdfVoxel {
  double d = 0.0;  // truncated signed distance, positive on the camera side
  double w = 0.0;
};

/// Hash-keyed TSDF on a world-aligned lattice: voxel (i, j, k) covers
/// [i, i+1) * voxel along x, and so on. Absent voxels are unobserved.
class SparseTsdfGrid {
 public:
  SparseTsdfGrid(double voxel, double band);

  [[nodiscard]] double voxel() const { return voxel_; }
  [[nodiscard]] double band() const { return band_; }
  [[nodiscard]] std::size_t size() const { return voxels_.size(); }
  [[nodiscard]] bool empty() const { return voxels_.empty(); }

  [[nodiscard]] VoxelKey key_of(const Vec3& p) const;
  [[nodiscard]] Vec3 center(const VoxelKey& key) const;
  [[nodiscard]] const TsdfVoxel* find(const VoxelKey& key) const;

  /// Running weighted average: D <- (W D + w d) / (W + w), W <- W + w.
  void update(const VoxelKey& key, double d, double w);

  [[nodiscard]] const std::unordered_map<VoxelKey, TsdfVoxel, VoxelKeyHash>& voxels() const { return voxels_; }
  [[nodiscard]] std::vector<VoxelKey> sorted_keys() const;

 private:
  double voxel_;
  double band_;
  std::unordered_map<VoxelKey, TsdfVoxel, VoxelKeyHash> voxels_;
};

/// A ray that hit a surface at `hit`. The band runs from hit - band (camera
/// side) to hit + neg_band (behind the surface).
struct RaySample {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  // unit
  double hit = 0.0;
  double neg_band = 0.0;
  double band = 0.0;
};

/// clamp(hit - t, -neg_band, band).
inline double truncated_distance(double hit, double t, double neg_band, double band) {
  return std::max(-neg_band, std::min(band, hit - t));
}

/// Behind-surface bandwidth: half the gap to the next surface along the ray,
/// capped at m.
double adaptive_neg_band(const Bvh& bvh, const Hit& hit, const Ray& ray, double m);

/// Marches the band at voxel/2 steps, touching each voxel once. A voxel whose
/// centre projects inside the band receives d = clamp(hit - t, -neg_band,
/// band) with weight `weight`.
void integrate_ray(SparseTsdfGrid& grid, const RaySample& sample, double weight);

struct FusionSource {
  TriangleMesh mesh;
  double weight = 1.0;          // C
  std::optional<double> band;   // m_k, defaults to the grid band
};

struct ConflateOptions {
  double voxel = 1.0;
  std::optional<double> band;   // defaults to 3 voxels
  unsigned threads = 0;
};

/// Casts the Fibonacci rays of every panoramic camera against each source
/// and integrates them into one grid, cameras in order, then sources, then
/// rays. Ray casting runs in parallel; integration order is fixed.
SparseTsdfGrid conflate_sources(const std::vector<FusionSource>& sources, const ViewSet& cameras,
                                const ConflateOptions& options);

/// Cells whose eight corner voxels are all observed; vertices welded per
/// lattice edge. Faces are oriented toward positive D.
TriangleMesh marching_cubes(const SparseTsdfGrid& grid);

/// ASCII `i j k D W`, keys sorted by k, j, i.
void save_grid(const SparseTsdfGrid& grid, const std::filesystem::path& path);

}  // namespace geofuse
