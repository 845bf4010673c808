#include "geofuse/pipeline/conflate.hpp"

#include "geofuse/views/views.hpp"

#include <spdlog/spdlog.h>

#include <fstream>

namespace geofuse {

ConflateResult conflate(const std::vector<FusionSource>& sources, const ConflatePipelineOptions& options) {
  if (sources.empty()) throw Error("conflate: no sources");
  if (options.window < 0) throw Error("conflate: window must be non-negative");
  if (options.lift < 0) throw Error("conflate: lift must be non-negative");
  const double occ_voxel = options.occupancy_voxel.value_or(4.0 * options.voxel);
  if (options.dump_dir) std::filesystem::create_directories(*options.dump_dir);

  std::vector<TriangleMesh> meshes;
  for (const auto& s : sources) meshes.push_back(s.mesh);
  const OccupancyGrid occ = build_occupancy(merge_meshes(meshes), occ_voxel);
  const ViewSet cameras = place_panoramic(occ, options.window, options.lift, options.rays_per_camera);
  spdlog::info("conflate: {}x{}x{} occupancy, {} panoramic cameras", occ.nx, occ.ny, occ.nz, cameras.size());

  if (options.dump_dir) {
    save_occupancy_layers(occ, *options.dump_dir / "occupancy.txt");
    std::ofstream out(*options.dump_dir / "cameras.txt");
    out.precision(17);
    for (const Camera& c : cameras) {
      const Vec3 p = camera_center(c);
      out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << options.rays_per_camera << '\n';
    }
    if (!out) throw Error("write failed: cameras.txt");
  }

  ConflateOptions copts;
  copts.voxel = options.voxel;
  copts.band = options.band;
  copts.threads = options.threads;
  const SparseTsdfGrid grid = conflate_sources(sources, cameras, copts);
  if (options.dump_dir) save_grid(grid, *options.dump_dir / "grid.txt");

  ConflateResult result;
  result.camera_count = cameras.size();
  result.voxel_count = grid.size();
  if (!grid.empty()) result.mesh = marching_cubes(grid);
  spdlog::info("conflate: {} vertices, {} faces", result.mesh.vertices.size(), result.mesh.faces.size());
  return result;
}

}  // namespace geofuse
