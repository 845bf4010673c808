#include "geofuse/pipeline/reconstruct.hpp"

#include "geofuse/render/depth.hpp"
#include "geofuse/util/parallel.hpp"
#include "geofuse/visibility/visibility.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace geofuse {

namespace {

const PinholeCamera& pinhole(const Camera& camera, std::size_t index) {
  const auto* pin = std::get_if<PinholeCamera>(&camera);
  if (!pin) throw Error("view " + std::to_string(index) + ": depth maps and masks need a pinhole camera");
  return *pin;
}

}  // namespace

ReconstructResult reconstruct(const std::vector<Vec3>& points, const ViewSet& views,
                              const ReconstructOptions& options) {
  options.energy.validate();
  if (views.empty()) throw Error("reconstruct: no views");
  if (options.dump_dir) std::filesystem::create_directories(*options.dump_dir);
  const auto dump = [&](const std::string& name) { return *options.dump_dir / name; };

  const TetComplex complex = tetrahedralize(points, options.delaunay);
  const std::vector<Vec3>& verts = complex.vertices();
  spdlog::info("delaunay: {} vertices, {} tets", complex.vertex_count(), complex.tet_count());

  // Index maps are needed for mask ingestion and for dumps of pinhole views.
  const bool need_maps = options.masks_dir.has_value() || options.dump_dir.has_value();
  std::vector<DepthIndexMap> maps(need_maps ? views.size() : 0);
  if (need_maps) {
    parallel_for(views.size(), options.threads, [&](std::size_t v) {
      if (options.masks_dir || std::holds_alternative<PinholeCamera>(views[v])) {
        maps[v] = render_point_depth(verts, pinhole(views[v], v));
      }
    });
  }

  std::vector<LineOfSight> sights;
  if (options.masks_dir) {
    const auto masks = load_visibility_masks(*options.masks_dir, maps);
    sights = collect_lines_of_sight(views, maps, masks);
  } else {
    std::vector<std::vector<std::int32_t>> visible(views.size());
    parallel_for(views.size(), options.threads, [&](std::size_t v) {
      visible[v] = hpr_visible(verts, camera_center(views[v]), options.hpr_gamma);
    });
    if (options.dump_dir) {
      for (std::size_t v = 0; v < views.size(); ++v) {
        if (maps[v].width == 0) continue;
        save_mask_pgm(mask_from_visible(maps[v], visible[v]), dump(mask_file_name(v)));
      }
    }
    sights = collect_lines_of_sight(views, visible);
  }
  spdlog::info("visibility: {} lines of sight from {} views", sights.size(), views.size());

  if (options.dump_dir) {
    for (std::size_t v = 0; v < maps.size(); ++v) {
      if (maps[v].width == 0) continue;
      save_pfm(maps[v], dump("depth_" + std::to_string(v) + ".pfm"));
      save_index_map(maps[v], dump("index_" + std::to_string(v) + ".bin"));
    }
    save_lines_of_sight(sights, dump("lines_of_sight.txt"));
    complex.dump(dump("tets.txt"));
  }

  const StGraph graph = build_st_graph(complex, sights, options.energy);
  if (options.dump_dir) graph.dump(dump("graph.txt"));
  const CutResult cut = max_flow(graph);
  const double gap = std::abs(cut.flow - cut.cut_capacity);
  if (gap > 1e-9 * std::max(1.0, cut.flow)) {
    spdlog::warn("max-flow duality gap {} (flow {}, cut {})", gap, cut.flow, cut.cut_capacity);
  }

  ReconstructResult result;
  result.mesh = extract_surface(complex, cut.labels);
  result.vertex_count = complex.vertex_count();
  result.tet_count = complex.tet_count();
  result.sight_count = sights.size();
  result.flow = cut.flow;
  result.cut_capacity = cut.cut_capacity;
  spdlog::info("surface: {} vertices, {} faces", result.mesh.vertices.size(), result.mesh.faces.size());
  return result;
}

}  // namespace geofuse
