#pragma once

#include "geofuse/geom/camera.hpp"
#include "geofuse/render/depth.hpp"

#include <filesystem>

namespace geofuse {

/// Hidden point removal: spherical flipping about the viewpoint with
/// R = 10^gamma * max distance, then a convex hull of the flipped points and
/// the viewpoint. Returns the sorted indices of points whose flipped image is
/// a hull vertex. Exact duplicates share their twin's result. A degenerate
/// flipped set reports every point visible (with a warning).
std::vector<std::int32_t> hpr_visible(const std::vector<Vec3>& cloud, const Vec3& viewpoint,
                                      double gamma = 2.0);

/// 8-bit mask aligned with an index map; >= 128 counts as visible.
struct VisibilityMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> values;
};

/// Binary PGM (P5, maxval 255).
VisibilityMask load_mask_pgm(const std::filesystem::path& path);
void save_mask_pgm(const VisibilityMask& mask, const std::filesystem::path& path);

std::string mask_file_name(std::size_t view);

/// 255 where the index map shows a point listed in `visible` (sorted), else 0.
VisibilityMask mask_from_visible(const DepthIndexMap& map, const std::vector<std::int32_t>& visible);

/// Reads `vis_<i>.pgm` for every view i. The overload taking index maps also
/// checks dimensions. Errors name the view index.
std::vector<VisibilityMask> load_visibility_masks(const std::filesystem::path& dir, std::size_t view_count);
std::vector<VisibilityMask> load_visibility_masks(const std::filesystem::path& dir,
                                                  const std::vector<DepthIndexMap>& index_maps);

struct LineOfSight {
  std::int32_t point = -1;
  Vec3 center = Vec3::Zero();
};

/// One line of sight per distinct (point, view) pair; views in order,
/// points ascending within a view.
std::vector<LineOfSight> collect_lines_of_sight(const ViewSet& views,
                                                const std::vector<std::vector<std::int32_t>>& visible);
/// Mask mode: the surviving point of every pixel whose mask value is >= 128.
std::vector<LineOfSight> collect_lines_of_sight(const ViewSet& views, const std::vector<DepthIndexMap>& index_maps,
                                                const std::vector<VisibilityMask>& masks);

/// ASCII, one `point_index cx cy cz` per line; '#' lines are comments.
void save_lines_of_sight(const std::vector<LineOfSight>& lines, const std::filesystem::path& path);
std::vector<LineOfSight> load_lines_of_sight(const std::filesystem::path& path);

}  // namespace geofuse
