#pragma once

#include "geofuse/geom/bvh.hpp"
#include "geofuse/geom/camera.hpp"

#include <filesystem>

namespace geofuse {

/// Per-pixel distance from the camera center (along the pixel ray), +inf
/// where nothing was rendered. Row-major, v rows of u pixels.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<double> depth;

  DepthMap() = default;
  DepthMap(int w, int h);
  [[nodiscard]] std::size_t pixel(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u);
  }
};

/// Depth plus the index of the point that won the z-buffer (-1 when empty).
struct DepthIndexMap : DepthMap {
  std::vector<std::int32_t> index;

  DepthIndexMap() = default;
  DepthIndexMap(int w, int h);
};

enum class PixelLabel : std::uint8_t { kInvalid = 0, kVisible = 1, kOccluded = 2 };

struct VisibilityLabelMap {
  int width = 0, height = 0;
  std::vector<PixelLabel> labels;
};

/// One-pixel splats with a z-buffer; exact depth ties keep the smaller index.
DepthIndexMap render_point_depth(const std::vector<Vec3>& points, const PinholeCamera& camera);

/// One ray per pixel centre, nearest hit distance.
DepthMap render_mesh_depth(const Bvh& bvh, const PinholeCamera& camera);
/// As above; an empty mesh renders as all +inf.
DepthMap render_mesh_depth(const TriangleMesh& mesh, const PinholeCamera& camera);

struct LabelOptions {
  /// Fraction of the depth range (max - min finite depth over both maps).
  double epsilon = 0.05;
  /// Threshold in scene units; overrides epsilon when set.
  std::optional<double> absolute;
};

/// Threshold actually applied by label_visibility for these maps.
double label_threshold(const DepthIndexMap& points, const DepthMap& surface, const LabelOptions& options);

/// Pixels holding a point are visible when the point depth is within the
/// threshold of the surface depth, or when no surface was rendered there;
/// otherwise occluded. Pixels without a point are invalid.
VisibilityLabelMap label_visibility(const DepthIndexMap& points, const DepthMap& surface,
                                    const LabelOptions& options = {});

/// Portable float map, little-endian, bottom row first.
void save_pfm(const DepthMap& map, const std::filesystem::path& path);
DepthMap load_pfm(const std::filesystem::path& path);
/// 16-bit binary PGM; depths scaled so the largest finite depth maps to
/// 65535, empty pixels to 0.
void save_depth_pgm16(const DepthMap& map, const std::filesystem::path& path);
/// int32 little-endian width and height, then width*height int32 indices.
void save_index_map(const DepthIndexMap& map, const std::filesystem::path& path);
std::vector<std::int32_t> load_index_map(const std::filesystem::path& path, int* width, int* height);

}  // namespace geofuse
