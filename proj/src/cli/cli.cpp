#include "geofuse/cli/cli.hpp"

#include "geofuse/eval/metrics.hpp"
#include "geofuse/geom/mesh_io.hpp"
#include "geofuse/pipeline/conflate.hpp"
#include "geofuse/pipeline/reconstruct.hpp"
#include "geofuse/render/depth.hpp"
#include "geofuse/util/parallel.hpp"
#include "geofuse/views/views.hpp"
#include "geofuse/visibility/visibility.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace geofuse::cli {

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double to_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) throw UsageError(what + ": not a number: '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// --- config file -----------------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("file not found: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Config entries become flags appended after the command line, skipping keys
// the command line already sets.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app, CLI::App& sub,
                                      const std::string& path) {
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    if (key == "config") throw UsageError(path + ": config files cannot include other config files");
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (!opt) {
      bool elsewhere = false;
      for (const CLI::App* other : app.get_subcommands({})) elsewhere |= other->get_option_no_throw(flag) != nullptr;
      if (!elsewhere) throw UsageError(path + ": unknown key '" + key + "'");
      continue;
    }
    if (given_on_command_line(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") merged.push_back(flag);
      else if (!(value == "false" || value == "0" || value == "no" || value == "off"))
        throw UsageError(path + ": '" + key + "' expects true or false");
    } else {
      merged.push_back(flag);
      merged.push_back(value);
    }
  }
  return merged;
}

// --- shared settings ----------------------------------------------------------

struct Common {
  unsigned threads = 0;
  std::string config;
  std::string log_level = "info";
  std::uint64_t seed = 42;
  bool dry_run = false;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sub.add_option("--config", c.config, "key = value file; command-line flags win");
  sub.add_option("--log-level", c.log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  sub.add_option("--seed", c.seed, "Seed for randomized steps")->capture_default_str();
  sub.add_flag("--dry-run", c.dry_run, "Validate and print the resolved settings, then exit");
}

// One `name=value` line per long option, in declaration order.
void print_settings(const CLI::App& sub, std::ostream& out) {
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "dry-run") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    out << name << '=' << value << '\n';
  }
}

struct ViewArgs {
  std::string spec = "spherical:26";
  ViewDefaults defaults;
};

void add_view_options(CLI::App& sub, ViewArgs& v) {
  sub.add_option("--views", v.spec, "spherical:N | grid:H,OV | oblique:H,OV,ANG | file:PATH")->capture_default_str();
  sub.add_option("--view-distance", v.defaults.distance, "Spherical camera distance (default: bbox diagonal)");
  sub.add_option("--fov", v.defaults.fov_deg, "Vertical field of view in degrees")->capture_default_str();
  sub.add_option("--width", v.defaults.width, "Image width")->capture_default_str();
  sub.add_option("--height", v.defaults.height, "Image height")->capture_default_str();
}

void validate_view_defaults(const ViewDefaults& d) {
  if (d.distance < 0) throw UsageError("--view-distance must be non-negative");
  if (!(d.fov_deg > 0 && d.fov_deg < 180)) throw UsageError("--fov must lie in (0, 180)");
  if (d.width <= 0 || d.height <= 0) throw UsageError("--width and --height must be positive");
}

void check_view_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon == std::string::npos || (kind != "spherical" && kind != "grid" && kind != "oblique" && kind != "file"))
    throw UsageError("--views: expected spherical:N, grid:H,OV, oblique:H,OV,ANG or file:PATH, got '" + spec + "'");
  // Numeric patterns are parsed fully here so errors surface before any work.
  if (kind != "file") parse_views(spec, Aabb{Vec3::Zero(), Vec3::Ones()});
}

PlyFormat ply_format(bool ascii) { return ascii ? PlyFormat::kAscii : PlyFormat::kBinaryLittleEndian; }

// Meshes and clouds share a loader: a file without faces is a cloud.
struct Geometry {
  TriangleMesh mesh;
  [[nodiscard]] bool is_cloud() const { return mesh.faces.empty(); }
};

Geometry load_geometry(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("file not found: " + path);
  Geometry g;
  g.mesh = load_mesh(path);
  return g;
}

std::vector<Vec3> load_points(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("file not found: " + path);
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".ply" || ext == ".PLY") return load_point_cloud(path).positions;
  return load_mesh(path).vertices;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

// --- subcommands -------------------------------------------------------------

struct ReconstructArgs {
  std::string input, output;
  ViewArgs views;
  std::string masks, dump;
  double hpr_gamma = 2.0;
  double alpha_max = 32.0;
  std::optional<double> sigma_soft;
  double lambda_avw = 1.0;
  double lambda_ql = 1.0;
  std::optional<double> jitter;
  bool ascii = false;
};

int do_reconstruct(const ReconstructArgs& a, const Common& c, std::ostream& out) {
  ReconstructOptions opts;
  opts.energy.alpha_max = a.alpha_max;
  opts.energy.sigma_soft = a.sigma_soft;
  opts.energy.lambda_avw = a.lambda_avw;
  opts.energy.lambda_ql = a.lambda_ql;
  opts.hpr_gamma = a.hpr_gamma;
  opts.threads = c.threads;
  opts.delaunay.jitter = a.jitter;
  opts.delaunay.seed = c.seed;
  if (!a.masks.empty()) opts.masks_dir = a.masks;
  if (!a.dump.empty()) opts.dump_dir = a.dump;
  try {
    opts.energy.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!(a.hpr_gamma > 0)) throw UsageError("--hpr-gamma must be positive");
  if (a.jitter && !(*a.jitter > 0)) throw UsageError("--jitter must be positive");
  validate_view_defaults(a.views.defaults);
  check_view_spec(a.views.spec);
  if (c.dry_run) return 0;

  const auto points = load_points(a.input);
  if (points.empty()) throw Error(a.input + ": no points");
  const ViewSet views = parse_views(a.views.spec, bounds_of(points), a.views.defaults);
  const auto result = reconstruct(points, views, opts);
  save_mesh(result.mesh, a.output, ply_format(a.ascii));
  out << "reconstruct: " << result.vertex_count << " points, " << views.size() << " views, " << result.sight_count
      << " lines of sight, " << result.mesh.faces.size() << " faces, flow=" << fmt(result.flow) << "\n";
  return 0;
}

struct ConflateArgs {
  std::vector<std::string> inputs;
  std::string output, dump;
  double voxel = 0.0;
  std::optional<double> band, occupancy_voxel;
  int window = 3;
  int lift = 1;
  int rays = 4096;
  std::vector<double> weights;
  bool ascii = false;
};

int do_conflate(const ConflateArgs& a, const Common& c, std::ostream& out) {
  if (!(a.voxel > 0)) throw UsageError("--voxel must be positive");
  const double band = a.band.value_or(3 * a.voxel);
  if (!(band > a.voxel)) throw UsageError("--band must exceed the voxel size");
  if (a.occupancy_voxel && !(*a.occupancy_voxel > 0)) throw UsageError("--occupancy-voxel must be positive");
  if (a.window < 0 || a.lift < 0) throw UsageError("--window and --lift must be non-negative");
  if (a.rays < 1) throw UsageError("--rays-per-camera must be positive");
  if (!a.weights.empty() && a.weights.size() != a.inputs.size())
    throw UsageError("--weight given " + std::to_string(a.weights.size()) + " times for " +
                     std::to_string(a.inputs.size()) + " inputs");
  for (double w : a.weights)
    if (!(w > 0)) throw UsageError("--weight values must be positive");
  if (c.dry_run) return 0;

  std::vector<FusionSource> sources;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    Geometry g = load_geometry(a.inputs[i]);
    if (g.is_cloud()) throw Error(a.inputs[i] + ": conflate needs a triangle mesh");
    sources.push_back({std::move(g.mesh), a.weights.empty() ? 1.0 : a.weights[i], std::nullopt});
  }
  ConflatePipelineOptions opts;
  opts.voxel = a.voxel;
  opts.band = band;
  opts.occupancy_voxel = a.occupancy_voxel;
  opts.window = a.window;
  opts.lift = a.lift;
  opts.rays_per_camera = a.rays;
  opts.threads = c.threads;
  if (!a.dump.empty()) opts.dump_dir = a.dump;
  const auto result = conflate(sources, opts);
  save_mesh(result.mesh, a.output, ply_format(a.ascii));
  out << "conflate: " << sources.size() << " sources, " << result.camera_count << " cameras, " << result.voxel_count
      << " voxels, " << result.mesh.faces.size() << " faces\n";
  return 0;
}

struct GenViewsArgs {
  std::vector<std::string> inputs;
  std::string output;
  ViewArgs views;
  bool panoramic = false;
  double occupancy_voxel = 0.0;
  int window = 3;
  int lift = 1;
  int rays = 4096;
};

int do_gen_views(const GenViewsArgs& a, const Common& c, std::ostream& out) {
  if (a.panoramic) {
    if (!(a.occupancy_voxel > 0)) throw UsageError("--panoramic needs a positive --occupancy-voxel");
    if (a.window < 0 || a.lift < 0 || a.rays < 1) throw UsageError("--window, --lift and --rays-per-camera out of range");
    if (c.dry_run) return 0;
    std::vector<TriangleMesh> meshes;
    for (const auto& in : a.inputs) meshes.push_back(load_geometry(in).mesh);
    const auto occ = build_occupancy(merge_meshes(meshes), a.occupancy_voxel);
    const ViewSet views = place_panoramic(occ, a.window, a.lift, a.rays);
    std::ofstream file(a.output);
    if (!file) throw Error("cannot write " + a.output);
    file << std::setprecision(17);
    for (const Camera& cam : views) {
      const Vec3 p = camera_center(cam);
      file << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << a.rays << '\n';
    }
    if (!file) throw Error("write failed: " + a.output);
    out << "gen-views: " << views.size() << " panoramic cameras\n";
    return 0;
  }
  validate_view_defaults(a.views.defaults);
  check_view_spec(a.views.spec);
  if (c.dry_run) return 0;
  Aabb box;
  for (const auto& in : a.inputs) box.extend(bounds_of(load_points(in)));
  const ViewSet views = parse_views(a.views.spec, box, a.views.defaults);
  save_view_file(views, a.output);
  out << "gen-views: " << views.size() << " cameras\n";
  return 0;
}

const PinholeCamera& require_pinhole(const Camera& cam, std::size_t i) {
  const auto* pin = std::get_if<PinholeCamera>(&cam);
  if (!pin) throw Error("view " + std::to_string(i) + " is not a pinhole camera");
  return *pin;
}

struct RenderArgs {
  std::string input, output_dir;
  ViewArgs views;
};

int do_render_depth(const RenderArgs& a, const Common& c, std::ostream& out) {
  validate_view_defaults(a.views.defaults);
  check_view_spec(a.views.spec);
  if (c.dry_run) return 0;
  const Geometry g = load_geometry(a.input);
  if (g.mesh.vertices.empty()) throw Error(a.input + ": no vertices");
  const ViewSet views = parse_views(a.views.spec, bounds_of(g.mesh.vertices), a.views.defaults);
  std::filesystem::create_directories(a.output_dir);
  const std::filesystem::path dir = a.output_dir;
  std::optional<Bvh> bvh;
  if (!g.is_cloud()) bvh.emplace(g.mesh);
  parallel_for(views.size(), c.threads, [&](std::size_t v) {
    const PinholeCamera& cam = require_pinhole(views[v], v);
    const std::string n = std::to_string(v);
    if (bvh) {
      const DepthMap map = render_mesh_depth(*bvh, cam);
      save_pfm(map, dir / ("depth_" + n + ".pfm"));
      save_depth_pgm16(map, dir / ("depth_" + n + ".pgm"));
    } else {
      const DepthIndexMap map = render_point_depth(g.mesh.vertices, cam);
      save_pfm(map, dir / ("depth_" + n + ".pfm"));
      save_depth_pgm16(map, dir / ("depth_" + n + ".pgm"));
      save_index_map(map, dir / ("index_" + n + ".bin"));
    }
  });
  out << "render-depth: " << views.size() << (bvh ? " mesh" : " point") << " depth maps\n";
  return 0;
}

struct VisibilityArgs {
  std::string input, output_dir, surface;
  ViewArgs views;
  double hpr_gamma = 2.0;
  double epsilon = 0.05;
  std::optional<double> absolute;
};

int do_visibility(const VisibilityArgs& a, const Common& c, std::ostream& out) {
  validate_view_defaults(a.views.defaults);
  check_view_spec(a.views.spec);
  if (!(a.hpr_gamma > 0)) throw UsageError("--hpr-gamma must be positive");
  if (!(a.epsilon > 0)) throw UsageError("--epsilon must be positive");
  if (a.absolute && !(*a.absolute > 0)) throw UsageError("--threshold must be positive");
  if (c.dry_run) return 0;
  const auto points = load_points(a.input);
  if (points.empty()) throw Error(a.input + ": no points");
  std::optional<Bvh> surface;
  if (!a.surface.empty()) {
    Geometry g = load_geometry(a.surface);
    if (g.is_cloud()) throw Error(a.surface + ": --surface needs a triangle mesh");
    surface.emplace(std::move(g.mesh));
  }
  const ViewSet views = parse_views(a.views.spec, bounds_of(points), a.views.defaults);
  std::filesystem::create_directories(a.output_dir);
  const std::filesystem::path dir = a.output_dir;

  std::vector<std::vector<std::int32_t>> visible(views.size());
  std::vector<std::size_t> occluded(views.size(), 0), labelled(views.size(), 0);
  parallel_for(views.size(), c.threads, [&](std::size_t v) {
    visible[v] = hpr_visible(points, camera_center(views[v]), a.hpr_gamma);
    const auto* pin = std::get_if<PinholeCamera>(&views[v]);
    if (!pin) return;
    const DepthIndexMap map = render_point_depth(points, *pin);
    save_mask_pgm(mask_from_visible(map, visible[v]), dir / mask_file_name(v));
    if (!surface) return;
    const VisibilityLabelMap labels = label_visibility(map, render_mesh_depth(*surface, *pin), {a.epsilon, a.absolute});
    VisibilityMask img{labels.width, labels.height, std::vector<std::uint8_t>(labels.labels.size(), 0)};
    for (std::size_t p = 0; p < labels.labels.size(); ++p) {
      if (labels.labels[p] == PixelLabel::kVisible) img.values[p] = 255, ++labelled[v];
      if (labels.labels[p] == PixelLabel::kOccluded) img.values[p] = 128, ++labelled[v], ++occluded[v];
    }
    save_mask_pgm(img, dir / ("label_" + std::to_string(v) + ".pgm"));
  });
  const auto sights = collect_lines_of_sight(views, visible);
  save_lines_of_sight(sights, dir / "lines_of_sight.txt");
  out << "visibility: " << views.size() << " views, " << sights.size() << " lines of sight\n";
  if (surface) {
    std::size_t occ = 0, all = 0;
    for (std::size_t v = 0; v < views.size(); ++v) occ += occluded[v], all += labelled[v];
    out << "labels: " << all << " point pixels, " << occ << " occluded\n";
  }
  return 0;
}

struct EvalArgs {
  std::string recon, reference;
  double tau = 0.0;
  std::size_t samples = 100000;
};

int do_eval(const EvalArgs& a, const Common& c, std::ostream& out) {
  if (!(a.tau > 0)) throw UsageError("--tau must be positive");
  if (a.samples == 0) throw UsageError("--samples must be positive");
  if (c.dry_run) return 0;
  const Geometry recon = load_geometry(a.recon);
  const Geometry ref = load_geometry(a.reference);
  auto points_of = [&](const Geometry& g, std::uint64_t seed) {
    return g.is_cloud() ? g.mesh.vertices : sample_surface(g.mesh, a.samples, seed);
  };
  const auto rp = points_of(recon, c.seed);
  const auto fp = points_of(ref, c.seed + 1);
  if (rp.empty() || fp.empty()) throw Error("eval: empty input");
  const double cd = chamfer_distance(rp, fp);
  const FScore fs = f_score(rp, fp, a.tau);
  const double md = ref.is_cloud() ? std::numeric_limits<double>::quiet_NaN() : mean_distance(rp, Bvh(ref.mesh));
  out << "chamfer=" << fmt(cd) << " fscore@" << fmt(a.tau) << "=" << fmt(fs.fscore) << " mean_dist=" << fmt(md) << "\n";
  out << "  chamfer     " << fmt(cd) << "\n"
      << "  precision   " << fmt(fs.precision) << "\n"
      << "  recall      " << fmt(fs.recall) << "\n"
      << "  f-score     " << fmt(fs.fscore) << "\n"
      << "  mean dist   " << fmt(md) << (ref.is_cloud() ? " (reference has no faces)" : "") << "\n";
  return 0;
}

}  // namespace

ViewSet parse_views(const std::string& spec, const Aabb& box, const ViewDefaults& d) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("--views: missing ':' in '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "file") return load_view_file(rest);
  const auto fields = split(rest, ',');
  std::vector<double> v;
  for (const auto& f : fields) v.push_back(to_number(f, "--views " + kind));
  if (kind == "spherical") {
    if (v.size() != 1 || v[0] < 1 || v[0] != std::floor(v[0])) throw UsageError("--views spherical:N needs a positive integer");
    const double distance = d.distance > 0 ? d.distance : box.diagonal();
    return spherical_views(box.center(), distance, static_cast<std::size_t>(v[0]), d.fov_deg, d.width, d.height);
  }
  if (kind == "grid" || kind == "oblique") {
    const std::size_t want = kind == "grid" ? 2 : 3;
    if (v.size() != want) throw UsageError("--views " + kind + " needs " + std::to_string(want) + " values");
    if (!(v[0] > 0)) throw UsageError("--views " + kind + ": height must be positive");
    if (!(v[1] >= 0 && v[1] < 1)) throw UsageError("--views " + kind + ": overlap must lie in [0, 1)");
    GridViewOptions g;
    g.height_agl = v[0];
    g.overlap = v[1];
    g.fov_deg = d.fov_deg;
    g.width = d.width;
    g.height = d.height;
    if (kind == "oblique") {
      if (!(v[2] > 0 && v[2] < 90)) throw UsageError("--views oblique: angle must lie in (0, 90)");
      g.mode = GridMode::kOblique;
      g.oblique_angle = v[2];
    }
    return grid_views(box, g);
  }
  throw UsageError("--views: unknown pattern '" + kind + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("geofuse", sink);
  logger->set_pattern("[%l] %v");
  const auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  CLI::App app{"Point cloud and mesh fusion tools", "geofuse"};
  app.require_subcommand(1);
  Common common;

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Surface from a point cloud via visibility graph cut");
  rec_cmd->add_option("input", rec.input, "Point cloud (PLY/OBJ)")->required();
  rec_cmd->add_option("-o,--output", rec.output, "Output mesh")->required();
  add_view_options(*rec_cmd, rec.views);
  rec_cmd->add_option("--masks", rec.masks, "Directory of vis_<i>.pgm masks (replaces HPR)");
  rec_cmd->add_option("--dump-intermediate", rec.dump, "Write depth maps, masks, sights and graph here");
  rec_cmd->add_option("--hpr-gamma", rec.hpr_gamma, "HPR radius exponent")->capture_default_str();
  rec_cmd->add_option("--alpha-max", rec.alpha_max, "Visibility confidence")->capture_default_str();
  rec_cmd->add_option("--sigma-soft", rec.sigma_soft, "Soft visibility scale (default 1% of bbox diagonal)");
  rec_cmd->add_option("--lambda-avw", rec.lambda_avw, "Adaptive weighting damping in [0, 1]")->capture_default_str();
  rec_cmd->add_option("--lambda-ql", rec.lambda_ql, "Facet quality weight")->capture_default_str();
  rec_cmd->add_option("--jitter", rec.jitter, "Perturb points by this fraction of the bbox diagonal (seeded)");
  rec_cmd->add_flag("--ascii", rec.ascii, "Write ASCII PLY");
  add_common(*rec_cmd, common);

  ConflateArgs con;
  auto* con_cmd = app.add_subcommand("conflate", "Fuse meshes through panoramic TSDF integration");
  con_cmd->add_option("inputs", con.inputs, "Input meshes")->required();
  con_cmd->add_option("-o,--output", con.output, "Output mesh")->required();
  con_cmd->add_option("--voxel", con.voxel, "TSDF voxel size")->required();
  con_cmd->add_option("--band", con.band, "Truncation band (default 3 voxels)");
  con_cmd->add_option("--occupancy-voxel", con.occupancy_voxel, "Camera placement voxel (default 4 voxels)");
  con_cmd->add_option("--window", con.window, "Placement window in occupancy voxels")->capture_default_str();
  con_cmd->add_option("--lift", con.lift, "Camera lift above the placed cell, in occupancy voxels")->capture_default_str();
  con_cmd->add_option("--rays-per-camera", con.rays, "Fibonacci rays per camera")->capture_default_str();
  con_cmd->add_option("--weight", con.weights, "Per-input quality weight, in input order");
  con_cmd->add_option("--dump-intermediate", con.dump, "Write occupancy, cameras and grid here");
  con_cmd->add_flag("--ascii", con.ascii, "Write ASCII PLY");
  add_common(*con_cmd, common);

  GenViewsArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-views", "Write a camera file");
  gen_cmd->add_option("inputs", gen.inputs, "Geometry that sets the layout box")->required();
  gen_cmd->add_option("-o,--output", gen.output, "View file")->required();
  add_view_options(*gen_cmd, gen.views);
  gen_cmd->add_flag("--panoramic", gen.panoramic, "Place panoramic cameras from occupancy instead");
  gen_cmd->add_option("--occupancy-voxel", gen.occupancy_voxel, "Occupancy voxel for --panoramic");
  gen_cmd->add_option("--window", gen.window, "Placement window")->capture_default_str();
  gen_cmd->add_option("--lift", gen.lift, "Camera lift in occupancy voxels")->capture_default_str();
  gen_cmd->add_option("--rays-per-camera", gen.rays, "Ray count written per camera")->capture_default_str();
  add_common(*gen_cmd, common);

  RenderArgs ren;
  auto* ren_cmd = app.add_subcommand("render-depth", "Depth (and index) maps of a mesh or cloud");
  ren_cmd->add_option("input", ren.input, "Mesh or point cloud")->required();
  ren_cmd->add_option("-o,--output", ren.output_dir, "Output directory")->required();
  add_view_options(*ren_cmd, ren.views);
  add_common(*ren_cmd, common);

  VisibilityArgs vis;
  auto* vis_cmd = app.add_subcommand("visibility", "HPR masks and lines of sight");
  vis_cmd->add_option("input", vis.input, "Point cloud")->required();
  vis_cmd->add_option("-o,--output", vis.output_dir, "Output directory")->required();
  add_view_options(*vis_cmd, vis.views);
  vis_cmd->add_option("--hpr-gamma", vis.hpr_gamma, "HPR radius exponent")->capture_default_str();
  vis_cmd->add_option("--surface", vis.surface, "Mesh for depth-test labels");
  vis_cmd->add_option("--epsilon", vis.epsilon, "Label threshold as a fraction of the depth range")->capture_default_str();
  vis_cmd->add_option("--threshold", vis.absolute, "Absolute label threshold");
  add_common(*vis_cmd, common);

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Chamfer, F-score and mean distance");
  ev_cmd->add_option("recon", ev.recon, "Reconstruction (mesh or cloud)")->required();
  ev_cmd->add_option("reference", ev.reference, "Reference (mesh or cloud)")->required();
  ev_cmd->add_option("--tau", ev.tau, "F-score threshold")->required();
  ev_cmd->add_option("--samples", ev.samples, "Surface samples per mesh")->capture_default_str();
  add_common(*ev_cmd, common);

  std::vector<std::string> argv = args;
  try {
    // The config file is merged before parsing so flags keep precedence.
    const auto sub_name = std::find_if(args.begin(), args.end(), [](const std::string& s) { return s.empty() || s[0] != '-'; });
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
    }
    if (!config.empty()) {
      if (sub_name == args.end()) throw UsageError("--config needs a subcommand");
      CLI::App* sub = app.get_subcommand_no_throw(*sub_name);
      if (!sub) throw UsageError("unknown subcommand '" + *sub_name + "'");
      argv = merge_config(args, app, *sub, config);
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* active = &app;
    for (const CLI::App* sub : app.get_subcommands()) active = sub;
    err << active->help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  logger->set_level(spdlog::level::from_str(common.log_level));
  if (common.dry_run) {
    for (const CLI::App* sub : app.get_subcommands()) print_settings(*sub, out);
  }
  try {
    if (rec_cmd->parsed()) return do_reconstruct(rec, common, out);
    if (con_cmd->parsed()) return do_conflate(con, common, out);
    if (gen_cmd->parsed()) return do_gen_views(gen, common, out);
    if (ren_cmd->parsed()) return do_render_depth(ren, common, out);
    if (vis_cmd->parsed()) return do_visibility(vis, common, out);
    if (ev_cmd->parsed()) return do_eval(ev, common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace geofuse::cli
