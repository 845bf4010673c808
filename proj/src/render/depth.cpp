#include "geofuse/render/depth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace geofuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_size(int w, int h) {
  if (w <= 0 || h <= 0) throw Error("depth map: non-positive dimensions");
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

DepthMap::DepthMap(int w, int h) : width(w), height(h) {
  check_size(w, h);
  depth.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kInf);
}

DepthIndexMap::DepthIndexMap(int w, int h) : DepthMap(w, h), index(depth.size(), -1) {}

DepthIndexMap render_point_depth(const std::vector<Vec3>& points, const PinholeCamera& camera) {
  DepthIndexMap map(camera.width(), camera.height());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto uv = camera.project(points[i]);
    if (!uv) continue;
    const double fu = std::floor((*uv)[0]);
    const double fv = std::floor((*uv)[1]);
    if (!(fu >= 0 && fv >= 0 && fu < map.width && fv < map.height)) continue;
    const std::size_t px = map.pixel(static_cast<int>(fu), static_cast<int>(fv));
    const double d = (points[i] - camera.center()).norm();
    // Points are visited in index order, so a strict comparison keeps the
    // smaller index on exact ties.
    if (d < map.depth[px]) {
      map.depth[px] = d;
      map.index[px] = static_cast<std::int32_t>(i);
    }
  }
  return map;
}

DepthMap render_mesh_depth(const Bvh& bvh, const PinholeCamera& camera) {
  DepthMap map(camera.width(), camera.height());
  Ray ray;
  ray.origin = camera.center();
  for (int v = 0; v < map.height; ++v) {
    for (int u = 0; u < map.width; ++u) {
      ray.direction = camera.pixel_ray(u + 0.5, v + 0.5);
      if (auto hit = bvh.ray_cast(ray)) map.depth[map.pixel(u, v)] = hit->t;
    }
  }
  return map;
}

DepthMap render_mesh_depth(const TriangleMesh& mesh, const PinholeCamera& camera) {
  if (mesh.empty()) return DepthMap(camera.width(), camera.height());
  return render_mesh_depth(Bvh(mesh), camera);
}

double label_threshold(const DepthIndexMap& points, const DepthMap& surface, const LabelOptions& options) {
  if (options.absolute) return *options.absolute;
  double lo = kInf, hi = -kInf;
  for (const auto* map : {static_cast<const DepthMap*>(&points), &surface}) {
    for (double d : map->depth) {
      if (!std::isfinite(d)) continue;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return hi >= lo ? options.epsilon * (hi - lo) : 0.0;
}

VisibilityLabelMap label_visibility(const DepthIndexMap& points, const DepthMap& surface,
                                    const LabelOptions& options) {
  if (points.width != surface.width || points.height != surface.height) {
    std::ostringstream msg;
    msg << "label_visibility: dimension mismatch (" << points.width << "x" << points.height << " vs "
        << surface.width << "x" << surface.height << ")";
    throw Error(msg.str());
  }
  const double threshold = label_threshold(points, surface, options);
  VisibilityLabelMap out;
  out.width = points.width;
  out.height = points.height;
  out.labels.assign(points.depth.size(), PixelLabel::kInvalid);
  for (std::size_t px = 0; px < points.depth.size(); ++px) {
    if (points.index[px] < 0) continue;
    const double ds = surface.depth[px];
    const bool visible = !std::isfinite(ds) || std::abs(points.depth[px] - ds) <= threshold;
    out.labels[px] = visible ? PixelLabel::kVisible : PixelLabel::kOccluded;
  }
  return out;
}

void save_pfm(const DepthMap& map, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  for (int v = map.height - 1; v >= 0; --v) {
    for (int u = 0; u < map.width; ++u) put_le(out, static_cast<float>(map.depth[map.pixel(u, v)]));
  }
  if (!out) throw Error("write failed: " + path.string());
}

DepthMap load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if (!in || magic != "Pf" || w <= 0 || h <= 0) throw Error(path.string() + ": not a grayscale PFM");
  if (scale > 0) throw Error(path.string() + ": big-endian PFM not supported");
  DepthMap map(w, h);
  for (int v = h - 1; v >= 0; --v) {
    for (int u = 0; u < w; ++u) map.depth[map.pixel(u, v)] = get_le<float>(in);
  }
  if (!in) throw Error(path.string() + ": truncated PFM");
  return map;
}

void save_depth_pgm16(const DepthMap& map, const std::filesystem::path& path) {
  double hi = 0.0;
  for (double d : map.depth) {
    if (std::isfinite(d)) hi = std::max(hi, d);
  }
  auto out = open_out(path);
  out << "P5\n" << map.width << " " << map.height << "\n65535\n";
  for (double d : map.depth) {
    std::uint16_t value = 0;
    if (std::isfinite(d) && hi > 0) value = static_cast<std::uint16_t>(std::lround(d / hi * 65535.0));
    // 16-bit PGM samples are most significant byte first.
    out.put(static_cast<char>(value >> 8));
    out.put(static_cast<char>(value & 0xff));
  }
  if (!out) throw Error("write failed: " + path.string());
}

void save_index_map(const DepthIndexMap& map, const std::filesystem::path& path) {
  auto out = open_out(path);
  put_le<std::int32_t>(out, map.width);
  put_le<std::int32_t>(out, map.height);
  for (std::int32_t idx : map.index) put_le(out, idx);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::int32_t> load_index_map(const std::filesystem::path& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const auto w = get_le<std::int32_t>(in);
  const auto h = get_le<std::int32_t>(in);
  if (!in || w <= 0 || h <= 0) throw Error(path.string() + ": bad index map header");
  std::vector<std::int32_t> index(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (auto& idx : index) idx = get_le<std::int32_t>(in);
  if (!in) throw Error(path.string() + ": truncated index map");
  if (width) *width = w;
  if (height) *height = h;
  return index;
}

}  // namespace geofuse
