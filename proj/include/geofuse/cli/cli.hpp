#pragma once

#include "geofuse/geom/camera.hpp"

#include <iosfwd>
#include <string>

namespace geofuse::cli {

/// Settings for `--views` patterns that need more than the pattern itself.
struct ViewDefaults {
  double distance = 0.0;  // spherical: camera distance from the box centre; 0 means the box diagonal
  double fov_deg = 60.0;
  int width = 256;
  int height = 256;
};

/// `spherical:N`, `grid:H,OV`, `oblique:H,OV,ANG` or `file:PATH`, laid out
/// around `box`. Throws Error on a malformed pattern.
ViewSet parse_views(const std::string& spec, const Aabb& box, const ViewDefaults& defaults = {});

/// Runs one subcommand. Exit codes: 0 success, 2 usage error, 1 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace geofuse::cli
