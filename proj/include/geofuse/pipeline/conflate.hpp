#pragma once

#include "geofuse/fusion/tsdf.hpp"

#include <filesystem>

namespace geofuse {

struct ConflatePipelineOptions {
  double voxel = 1.0;
  std::optional<double> band;             // defaults to 3 voxels
  std::optional<double> occupancy_voxel;  // defaults to 4 voxels
  int window = 3;
  int lift = 1;                           // camera offset above the placed cell, in occupancy voxels
  int rays_per_camera = 4096;
  unsigned threads = 0;
  /// Occupancy layers, camera centres and the TSDF grid are written here.
  std::optional<std::filesystem::path> dump_dir;
};

struct ConflateResult {
  TriangleMesh mesh;
  std::size_t camera_count = 0;
  std::size_t voxel_count = 0;
};

/// Union occupancy, panoramic placement, TSDF conflation, marching cubes.
ConflateResult conflate(const std::vector<FusionSource>& sources, const ConflatePipelineOptions& options);

}  // namespace geofuse
