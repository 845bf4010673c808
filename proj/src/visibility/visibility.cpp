#include "geofuse/visibility/visibility.hpp"

#include "geofuse/visibility/hull.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace geofuse {

std::vector<std::int32_t> hpr_visible(const std::vector<Vec3>& cloud, const Vec3& viewpoint, double gamma) {
  if (cloud.empty()) throw Error("hpr_visible: empty cloud");
  const std::size_t n = cloud.size();

  // Exact duplicates collapse to their first occurrence.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return less(cloud[a], cloud[b]); });
  std::vector<std::size_t> rep(n);
  std::vector<std::size_t> unique_ids;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && cloud[order[k]] == cloud[order[k - 1]]) {
      rep[order[k]] = rep[order[k - 1]];
    } else {
      rep[order[k]] = unique_ids.size();
      unique_ids.push_back(order[k]);
    }
  }

  double max_norm = 0.0;
  for (const Vec3& p : cloud) {
    const double r = (p - viewpoint).norm();
    if (r == 0.0) throw Error("hpr_visible: viewpoint coincides with a point");
    max_norm = std::max(max_norm, r);
  }
  const double radius = std::pow(10.0, gamma) * max_norm;

  std::vector<Vec3> flipped;
  flipped.reserve(unique_ids.size() + 1);
  for (std::size_t id : unique_ids) {
    const Vec3 q = cloud[id] - viewpoint;
    const double r = q.norm();
    flipped.push_back(q + 2.0 * (radius - r) * (q / r));
  }
  flipped.push_back(Vec3::Zero());

  std::vector<char> on_hull(unique_ids.size(), 0);
  try {
    for (const Face& f : convex_hull_faces(flipped)) {
      for (auto v : f) {
        if (static_cast<std::size_t>(v) < unique_ids.size()) on_hull[static_cast<std::size_t>(v)] = 1;
      }
    }
  } catch (const Error& e) {
    spdlog::warn("hpr_visible: {}; reporting all {} points visible", e.what(), n);
    std::fill(on_hull.begin(), on_hull.end(), 1);
  }

  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (on_hull[rep[i]]) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

VisibilityMask load_mask_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  // Header tokens may be separated by whitespace and '#' comments.
  auto token = [&]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) break;
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  };
  VisibilityMask mask;
  int maxval = 0;
  try {
    if (token() != "P5") throw Error(path.string() + ": not a binary PGM (P5)");
    mask.width = std::stoi(token());
    mask.height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::logic_error&) {
    throw Error(path.string() + ": malformed PGM header");
  }
  if (mask.width <= 0 || mask.height <= 0) throw Error(path.string() + ": bad PGM dimensions");
  if (maxval != 255) throw Error(path.string() + ": PGM maxval must be 255");
  mask.values.resize(static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height));
  in.read(reinterpret_cast<char*>(mask.values.data()), static_cast<std::streamsize>(mask.values.size()));
  if (!in) throw Error(path.string() + ": truncated PGM");
  return mask;
}

void save_mask_pgm(const VisibilityMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.values.data()), static_cast<std::streamsize>(mask.values.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string mask_file_name(std::size_t view) { return "vis_" + std::to_string(view) + ".pgm"; }

std::vector<VisibilityMask> load_visibility_masks(const std::filesystem::path& dir, std::size_t view_count) {
  std::vector<VisibilityMask> masks;
  for (std::size_t i = 0; i < view_count; ++i) {
    const auto path = dir / mask_file_name(i);
    if (!std::filesystem::exists(path)) {
      throw Error("view " + std::to_string(i) + ": missing mask " + path.string());
    }
    try {
      masks.push_back(load_mask_pgm(path));
    } catch (const Error& e) {
      throw Error("view " + std::to_string(i) + ": " + e.what());
    }
  }
  return masks;
}

std::vector<VisibilityMask> load_visibility_masks(const std::filesystem::path& dir,
                                                  const std::vector<DepthIndexMap>& index_maps) {
  auto masks = load_visibility_masks(dir, index_maps.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].width != index_maps[i].width || masks[i].height != index_maps[i].height) {
      std::ostringstream msg;
      msg << "view " << i << ": mask is " << masks[i].width << "x" << masks[i].height << ", index map is "
          << index_maps[i].width << "x" << index_maps[i].height;
      throw Error(msg.str());
    }
  }
  return masks;
}

namespace {

void append_view(std::vector<std::int32_t> points, const Vec3& center, std::vector<LineOfSight>& out) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (std::int32_t p : points) out.push_back({p, center});
}

}  // namespace

std::vector<LineOfSight> collect_lines_of_sight(const ViewSet& views,
                                                const std::vector<std::vector<std::int32_t>>& visible) {
  if (views.size() != visible.size()) throw Error("collect_lines_of_sight: one visible set per view expected");
  std::vector<LineOfSight> out;
  for (std::size_t v = 0; v < views.size(); ++v) append_view(visible[v], camera_center(views[v]), out);
  return out;
}

std::vector<LineOfSight> collect_lines_of_sight(const ViewSet& views, const std::vector<DepthIndexMap>& index_maps,
                                                const std::vector<VisibilityMask>& masks) {
  if (views.size() != index_maps.size() || views.size() != masks.size()) {
    throw Error("collect_lines_of_sight: one index map and one mask per view expected");
  }
  std::vector<LineOfSight> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& map = index_maps[v];
    const auto& mask = masks[v];
    if (mask.width != map.width || mask.height != map.height) {
      throw Error("view " + std::to_string(v) + ": mask and index map dimensions differ");
    }
    std::vector<std::int32_t> points;
    for (std::size_t px = 0; px < map.index.size(); ++px) {
      if (map.index[px] >= 0 && mask.values[px] >= 128) points.push_back(map.index[px]);
    }
    append_view(std::move(points), camera_center(views[v]), out);
  }
  return out;
}

void save_lines_of_sight(const std::vector<LineOfSight>& lines, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (const auto& l : lines) {
    out << l.point << ' ' << l.center.x() << ' ' << l.center.y() << ' ' << l.center.z() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<LineOfSight> load_lines_of_sight(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<LineOfSight> lines;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    LineOfSight l;
    std::string extra;
    if (!(ss >> l.point >> l.center.x() >> l.center.y() >> l.center.z()) || (ss >> extra) || l.point < 0) {
      throw Error(path.string() + ":" + std::to_string(no) + ": expected `point_index cx cy cz`");
    }
    lines.push_back(l);
  }
  return lines;
}

VisibilityMask mask_from_visible(const DepthIndexMap& map, const std::vector<std::int32_t>& visible) {
  VisibilityMask mask{map.width, map.height, std::vector<std::uint8_t>(map.index.size(), 0)};
  for (std::size_t p = 0; p < map.index.size(); ++p) {
    if (map.index[p] >= 0 && std::binary_search(visible.begin(), visible.end(), map.index[p])) mask.values[p] = 255;
  }
  return mask;
}

}  // namespace geofuse
