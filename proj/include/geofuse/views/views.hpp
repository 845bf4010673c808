#pragma once

#include "geofuse/geom/camera.hpp"

#include <filesystem>

namespace geofuse {

/// Cameras at target + radius * fibonacci_directions(count), each looking at
/// the target.
ViewSet spherical_views(const Vec3& target, double radius, std::size_t count, double fov_deg = 60.0,
                        int width = 256, int height = 256);

enum class GridMode { kNadir, kOblique };

struct GridViewOptions {
  double height_agl = 10.0;    // above the top of the box
  double overlap = 0.6;        // fraction of the footprint shared by neighbours
  GridMode mode = GridMode::kNadir;
  double oblique_angle = 30.0;  // degrees off nadir
  double fov_deg = 60.0;
  int width = 256;
  int height = 256;
};

/// Square ground footprint of a nadir camera at `height_agl`.
double grid_footprint(const GridViewOptions& options);

/// Downward cameras on an XY lattice centred on the box. The lattice spans
/// the box extent plus enough nodes for the footprints to cover it. Oblique
/// mode adds four cameras per node pitched toward +x, +y, -x, -y.
ViewSet grid_views(const Aabb& box, const GridViewOptions& options);

/// Text format: one camera per line, `px py pz tx ty tz fov width height`.
/// Blank lines and lines starting with '#' are skipped.
ViewSet load_view_file(const std::filesystem::path& path);
void save_view_file(const ViewSet& views, const std::filesystem::path& path);

/// Coarse voxelization of a mesh with a per-column top layer.
struct OccupancyGrid {
  Vec3 origin = Vec3::Zero();
  double voxel = 1.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<std::uint8_t> occupied;  // x fastest, then y, then z
  std::vector<std::int32_t> top;       // nx * ny, x fastest; -1 for empty columns

  [[nodiscard]] std::size_t cell(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] bool at(int i, int j, int k) const { return occupied[cell(i, j, k)] != 0; }
  [[nodiscard]] std::int32_t top_at(int i, int j) const {
    return top[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
  }
  [[nodiscard]] Vec3 voxel_center(int i, int j, int k) const {
    return origin + voxel * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
};

/// Marks every voxel a triangle touches (separating-axis triangle/box test
/// on a slightly inflated box). The lattice is world aligned: the origin is
/// floor(min / voxel) * voxel.
OccupancyGrid build_occupancy(const TriangleMesh& mesh, double voxel, std::size_t cell_budget = 100'000'000);

/// ASCII dump: a header line `nx ny nz voxel ox oy oz`, then the top layer
/// as ny rows of nx values, then each z layer as ny rows of 0/1 characters.
void save_occupancy_layers(const OccupancyGrid& grid, const std::filesystem::path& path);

struct CellIndex {
  int i = 0, j = 0, k = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Camera cells from a top-height layer (nx * ny, x fastest). begin is the
/// highest top layer in the (2*window+1)^2 neighbourhood, end is one past the
/// highest begin in the same neighbourhood; windows are clamped at the
/// borders. Every begin is computed before any end. Columns whose
/// neighbourhood is entirely empty yield nothing. Output runs over i, then j,
/// then k, ascending.
std::vector<CellIndex> panoramic_indices(const std::vector<std::int32_t>& top, int nx, int ny, int window);

/// Panoramic cameras at the centres of voxels (i, j, k + lift) for the cells
/// of panoramic_indices.
ViewSet place_panoramic(const OccupancyGrid& grid, int window = 3, int lift = 0, int ray_count = 4096);

}  // namespace geofuse
