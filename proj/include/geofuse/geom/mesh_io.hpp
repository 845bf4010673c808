#pragma once

#include "geofuse/geom/types.hpp"

#include <filesystem>

namespace geofuse {

enum class PlyFormat { kBinaryLittleEndian, kAscii };

/// Non-fatal observations made while loading a file.
struct LoadReport {
  std::size_t ignored_records = 0;     // OBJ records other than v/f
  std::size_t dropped_faces = 0;       // faces repeating a vertex index
  std::size_t triangulated_faces = 0;  // polygons split into fans
};

PointCloud load_point_cloud(const std::filesystem::path& path);
void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Loads PLY or OBJ (chosen by extension). Polygons are fan-triangulated.
TriangleMesh load_mesh(const std::filesystem::path& path, LoadReport* report = nullptr);
/// Saves PLY (binary little-endian unless `format` says otherwise) or OBJ.
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

}  // namespace geofuse
