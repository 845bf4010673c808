#pragma once

#include "geofuse/delaunay/tet_complex.hpp"
#include "geofuse/surface/graph_cut.hpp"

#include <filesystem>

namespace geofuse {

struct ReconstructOptions {
  EnergyParams energy;
  double hpr_gamma = 2.0;
  /// Read `vis_<i>.pgm` masks from here instead of running HPR. Requires
  /// pinhole views.
  std::optional<std::filesystem::path> masks_dir;
  TetrahedralizeOptions delaunay;
  unsigned threads = 0;
  /// Depth/index maps, visibility masks, lines of sight, the tet complex and
  /// the graph are written here when set.
  std::optional<std::filesystem::path> dump_dir;
};

struct ReconstructResult {
  TriangleMesh mesh;
  std::size_t vertex_count = 0;
  std::size_t tet_count = 0;
  std::size_t sight_count = 0;
  double flow = 0.0;
  double cut_capacity = 0.0;
};

/// Point cloud to watertight surface: Delaunay, per-view visibility (HPR or
/// masks), lines of sight, s-t graph, min cut, extraction.
ReconstructResult reconstruct(const std::vector<Vec3>& points, const ViewSet& views,
                              const ReconstructOptions& options = {});

}  // namespace geofuse
