#include "geofuse/geom/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace geofuse {

namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Scalar { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<Scalar> parse_scalar(std::string_view name) {
  static const std::unordered_map<std::string_view, Scalar> kTypes = {
      {"char", Scalar::kInt8},     {"int8", Scalar::kInt8},       {"uchar", Scalar::kUInt8},
      {"uint8", Scalar::kUInt8},   {"short", Scalar::kInt16},     {"int16", Scalar::kInt16},
      {"ushort", Scalar::kUInt16}, {"uint16", Scalar::kUInt16},   {"int", Scalar::kInt32},
      {"int32", Scalar::kInt32},   {"uint", Scalar::kUInt32},     {"uint32", Scalar::kUInt32},
      {"float", Scalar::kFloat32}, {"float32", Scalar::kFloat32}, {"double", Scalar::kFloat64},
      {"float64", Scalar::kFloat64}};
  const auto it = kTypes.find(name);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUInt8: return 1;
    case Scalar::kInt16:
    case Scalar::kUInt16: return 2;
    case Scalar::kInt32:
    case Scalar::kUInt32:
    case Scalar::kFloat32: return 4;
    case Scalar::kFloat64: return 8;
  }
  return 0;
}

bool is_floating(Scalar s) { return s == Scalar::kFloat32 || s == Scalar::kFloat64; }

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double decode(Scalar s, const char* p) {
  switch (s) {
    case Scalar::kInt8: return load_le<std::int8_t>(p);
    case Scalar::kUInt8: return load_le<std::uint8_t>(p);
    case Scalar::kInt16: return load_le<std::int16_t>(p);
    case Scalar::kUInt16: return load_le<std::uint16_t>(p);
    case Scalar::kInt32: return load_le<std::int32_t>(p);
    case Scalar::kUInt32: return load_le<std::uint32_t>(p);
    case Scalar::kFloat32: return load_le<float>(p);
    case Scalar::kFloat64: return load_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  // Column-major storage: scalars[p][i]; lists[p][i] holds list values.
  std::vector<std::vector<double>> scalars;
  std::vector<std::vector<std::vector<std::int64_t>>> lists;

  [[nodiscard]] int find(std::string_view prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i)
      if (properties[i].name == prop) return static_cast<int>(i);
    return -1;
  }
};

struct PlyFile {
  bool binary = false;
  std::vector<PlyElement> elements;

  PlyElement* element(std::string_view name) {
    for (auto& e : elements)
      if (e.name == name) return &e;
    return nullptr;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_number(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Reads lines from a buffer while tracking the 1-based line number.
class LineReader {
 public:
  explicit LineReader(std::string_view data) : data_(data) {}
  bool next(std::string_view& line) {
    if (pos_ >= data_.size()) return false;
    std::size_t end = data_.find('\n', pos_);
    if (end == std::string_view::npos) end = data_.size();
    line = data_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }
  [[nodiscard]] std::size_t line_no() const { return line_no_; }
  [[nodiscard]] std::size_t offset() const { return std::min(pos_, data_.size()); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

PlyFile parse_ply(const std::string& bytes, const std::string& label) {
  PlyFile ply;
  LineReader reader(bytes);
  std::string_view line;
  auto fail = [&](const std::string& what) -> Error {
    return Error(label + ": line " + std::to_string(reader.line_no()) + ": " + what);
  };
  if (!reader.next(line) || line != "ply") throw fail("missing 'ply' magic");
  bool have_format = false;
  bool ended = false;
  while (reader.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0") throw fail("malformed format line");
      if (tok[1] == "ascii") {
        ply.binary = false;
      } else if (tok[1] == "binary_little_endian") {
        ply.binary = true;
      } else {
        throw fail("unsupported format '" + std::string(tok[1]) + "'");
      }
      have_format = true;
    } else if (tok[0] == "element") {
      double count = 0;
      if (tok.size() != 3 || !parse_number(tok[2], count) || count < 0) throw fail("malformed element line");
      PlyElement e;
      e.name = std::string(tok[1]);
      e.count = static_cast<std::size_t>(count);
      ply.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (ply.elements.empty()) throw fail("property before any element");
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = parse_scalar(tok[2]);
        const auto it = parse_scalar(tok[3]);
        if (!ct || !it || is_floating(*ct)) throw fail("malformed list property");
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *it;
        prop.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        const auto t = parse_scalar(tok[1]);
        if (!t) throw fail("unknown property type '" + std::string(tok[1]) + "'");
        prop.type = *t;
        prop.name = std::string(tok[2]);
      } else {
        throw fail("malformed property line");
      }
      ply.elements.back().properties.push_back(prop);
    } else if (tok[0] == "end_header") {
      ended = true;
      break;
    } else {
      throw fail("unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_format) throw Error(label + ": malformed header: no format line");
  if (!ended) throw Error(label + ": malformed header: missing end_header");

  for (auto& e : ply.elements) {
    e.scalars.assign(e.properties.size(), {});
    e.lists.assign(e.properties.size(), {});
    for (std::size_t p = 0; p < e.properties.size(); ++p) {
      if (e.properties[p].is_list) {
        e.lists[p].resize(e.count);
      } else {
        e.scalars[p].resize(e.count);
      }
    }
  }

  if (ply.binary) {
    std::size_t off = reader.offset();
    const char* base = bytes.data();
    auto need = [&](std::size_t n, const PlyElement& e) {
      if (off + n > bytes.size())
        throw Error(label + ": truncated element data for '" + e.name + "' at byte offset " + std::to_string(off));
    };
    for (auto& e : ply.elements) {
      for (std::size_t i = 0; i < e.count; ++i) {
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const PlyProperty& prop = e.properties[p];
          if (prop.is_list) {
            need(scalar_size(prop.count_type), e);
            const double n = decode(prop.count_type, base + off);
            off += scalar_size(prop.count_type);
            if (n < 0) throw Error(label + ": negative list length at byte offset " + std::to_string(off));
            auto& values = e.lists[p][i];
            values.resize(static_cast<std::size_t>(n));
            need(values.size() * scalar_size(prop.type), e);
            for (auto& v : values) {
              v = static_cast<std::int64_t>(decode(prop.type, base + off));
              off += scalar_size(prop.type);
            }
          } else {
            need(scalar_size(prop.type), e);
            e.scalars[p][i] = decode(prop.type, base + off);
            off += scalar_size(prop.type);
          }
        }
      }
    }
  } else {
    for (auto& e : ply.elements) {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!reader.next(line))
          throw Error(label + ": truncated element data for '" + e.name + "' after line " +
                      std::to_string(reader.line_no()));
        const auto tok = split_ws(line);
        std::size_t k = 0;
        auto number = [&](const char* what) {
          double v = 0;
          if (k >= tok.size()) throw fail(std::string("missing ") + what);
          if (!parse_number(tok[k], v)) throw fail("non-numeric value '" + std::string(tok[k]) + "'");
          ++k;
          return v;
        };
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const PlyProperty& prop = e.properties[p];
          if (prop.is_list) {
            const double n = number("list length");
            if (n < 0) throw fail("negative list length");
            auto& values = e.lists[p][i];
            values.resize(static_cast<std::size_t>(n));
            for (auto& v : values) v = static_cast<std::int64_t>(number("list value"));
          } else {
            const double v = number("property value");
            // Values of float properties carry float precision.
            e.scalars[p][i] = prop.type == Scalar::kFloat32 ? static_cast<double>(static_cast<float>(v)) : v;
          }
        }
        if (k != tok.size()) throw fail("extra values in element '" + e.name + "'");
      }
    }
  }
  return ply;
}

std::vector<Vec3> extract_positions(PlyFile& ply, const std::string& label) {
  PlyElement* v = ply.element("vertex");
  if (v == nullptr) throw Error(label + ": no vertex element");
  const int ix = v->find("x"), iy = v->find("y"), iz = v->find("z");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(label + ": vertex element lacks x/y/z");
  for (const int i : {ix, iy, iz}) {
    const auto& prop = v->properties[static_cast<std::size_t>(i)];
    if (prop.is_list || !is_floating(prop.type))
      throw Error(label + ": vertex property '" + prop.name + "' must be float");
  }
  std::vector<Vec3> out(v->count);
  for (std::size_t i = 0; i < v->count; ++i) {
    out[i] = Vec3(v->scalars[static_cast<std::size_t>(ix)][i], v->scalars[static_cast<std::size_t>(iy)][i],
                  v->scalars[static_cast<std::size_t>(iz)][i]);
    if (!out[i].allFinite()) throw Error(label + ": vertex " + std::to_string(i) + " is not finite");
  }
  return out;
}

std::vector<Rgb> extract_colors(PlyFile& ply) {
  PlyElement* v = ply.element("vertex");
  const int ir = v->find("red"), ig = v->find("green"), ib = v->find("blue");
  if (ir < 0 || ig < 0 || ib < 0) return {};
  std::vector<Rgb> out(v->count);
  for (std::size_t i = 0; i < v->count; ++i) {
    out[i] = Rgb{static_cast<std::uint8_t>(v->scalars[static_cast<std::size_t>(ir)][i]),
                 static_cast<std::uint8_t>(v->scalars[static_cast<std::size_t>(ig)][i]),
                 static_cast<std::uint8_t>(v->scalars[static_cast<std::size_t>(ib)][i])};
  }
  return out;
}

void append_polygon(TriangleMesh& mesh, const std::vector<std::int64_t>& poly, std::size_t face_no,
                    LoadReport& report) {
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());
  for (const auto idx : poly) {
    if (idx < 0 || idx >= n)
      throw Error("face " + std::to_string(face_no) + " references vertex " + std::to_string(idx) +
                  " but the mesh has " + std::to_string(n) + " vertices");
  }
  if (poly.size() < 3) throw Error("face " + std::to_string(face_no) + " has fewer than 3 vertices");
  if (poly.size() > 3) ++report.triangulated_faces;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const Face f{static_cast<std::int32_t>(poly[0]), static_cast<std::int32_t>(poly[k]),
                 static_cast<std::int32_t>(poly[k + 1])};
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      ++report.dropped_faces;
      continue;
    }
    mesh.faces.push_back(f);
  }
}

TriangleMesh load_ply_mesh(const std::filesystem::path& path, LoadReport& report) {
  const std::string label = path.string();
  PlyFile ply = parse_ply(read_file(path), label);
  TriangleMesh mesh;
  mesh.vertices = extract_positions(ply, label);
  if (PlyElement* f = ply.element("face")) {
    int idx = f->find("vertex_indices");
    if (idx < 0) idx = f->find("vertex_index");
    if (idx < 0 || !f->properties[static_cast<std::size_t>(idx)].is_list)
      throw Error(label + ": face element lacks a vertex_indices list");
    for (std::size_t i = 0; i < f->count; ++i)
      append_polygon(mesh, f->lists[static_cast<std::size_t>(idx)][i], i, report);
  }
  return mesh;
}

TriangleMesh load_obj_mesh(const std::filesystem::path& path, LoadReport& report) {
  const std::string bytes = read_file(path);
  LineReader reader(bytes);
  std::string_view line;
  TriangleMesh mesh;
  std::vector<std::vector<std::int64_t>> polygons;
  std::vector<std::size_t> polygon_lines;
  while (reader.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    auto fail = [&](const std::string& what) {
      return Error(path.string() + ": line " + std::to_string(reader.line_no()) + ": " + what);
    };
    if (tok[0] == "v") {
      if (tok.size() < 4) throw fail("vertex needs 3 coordinates");
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        if (!parse_number(tok[static_cast<std::size_t>(k) + 1], p[k])) throw fail("non-numeric vertex coordinate");
      mesh.vertices.push_back(p);
    } else if (tok[0] == "f") {
      std::vector<std::int64_t> poly;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string_view ref = tok[k].substr(0, tok[k].find('/'));
        double v = 0;
        if (!parse_number(ref, v) || v == 0) throw fail("malformed face index '" + std::string(tok[k]) + "'");
        const auto idx = static_cast<std::int64_t>(v);
        // OBJ is 1-based; negative indices count back from the latest vertex.
        poly.push_back(idx > 0 ? idx - 1 : static_cast<std::int64_t>(mesh.vertices.size()) + idx);
      }
      polygons.push_back(std::move(poly));
    } else {
      ++report.ignored_records;
    }
  }
  for (std::size_t i = 0; i < polygons.size(); ++i) append_polygon(mesh, polygons[i], i, report);
  if (report.ignored_records > 0)
    spdlog::warn("{}: ignored {} non v/f records", path.string(), report.ignored_records);
  return mesh;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::string format_float(float v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

std::string ply_bytes(const std::vector<Vec3>& vertices, const std::vector<Rgb>* colors,
                      const std::vector<Face>* faces, PlyFormat format) {
  const bool with_colors = colors != nullptr && !colors->empty();
  std::string out;
  out += "ply\n";
  out += format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (with_colors) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (faces != nullptr) {
    out += "element face " + std::to_string(faces->size()) + "\n";
    out += "property list uchar int vertex_indices\n";
  }
  out += "end_header\n";
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& p = vertices[i];
    if (format == PlyFormat::kAscii) {
      out += format_float(static_cast<float>(p.x())) + " " + format_float(static_cast<float>(p.y())) + " " +
             format_float(static_cast<float>(p.z()));
      if (with_colors) {
        const Rgb& c = (*colors)[i];
        out += " " + std::to_string(c.r) + " " + std::to_string(c.g) + " " + std::to_string(c.b);
      }
      out += "\n";
    } else {
      for (int k = 0; k < 3; ++k) put_le(out, static_cast<float>(p[k]));
      if (with_colors) {
        const Rgb& c = (*colors)[i];
        put_le(out, c.r);
        put_le(out, c.g);
        put_le(out, c.b);
      }
    }
  }
  if (faces != nullptr) {
    for (const Face& f : *faces) {
      if (format == PlyFormat::kAscii) {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
      } else {
        put_le(out, static_cast<std::uint8_t>(3));
        for (const auto idx : f) put_le(out, static_cast<std::int32_t>(idx));
      }
    }
  }
  return out;
}

}  // namespace

PointCloud load_point_cloud(const std::filesystem::path& path) {
  if (lower_extension(path) == ".obj") {
    LoadReport report;
    TriangleMesh m = load_obj_mesh(path, report);
    return PointCloud{std::move(m.vertices), {}};
  }
  const std::string label = path.string();
  PlyFile ply = parse_ply(read_file(path), label);
  PointCloud cloud;
  cloud.positions = extract_positions(ply, label);
  cloud.colors = extract_colors(ply);
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  if (cloud.has_colors() && cloud.colors.size() != cloud.positions.size())
    throw Error("point cloud color count does not match position count");
  write_bytes(path, ply_bytes(cloud.positions, &cloud.colors, nullptr, format));
}

TriangleMesh load_mesh(const std::filesystem::path& path, LoadReport* report) {
  LoadReport local;
  LoadReport& r = report != nullptr ? *report : local;
  const std::string ext = lower_extension(path);
  if (ext == ".obj") return load_obj_mesh(path, r);
  if (ext == ".ply") return load_ply_mesh(path, r);
  throw Error("unsupported mesh format: " + path.string());
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, PlyFormat format) {
  validate_mesh(mesh);
  const std::string ext = lower_extension(path);
  if (ext == ".obj") {
    std::string out;
    char buf[128];
    for (const Vec3& p : mesh.vertices) {
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
      out += buf;
    }
    for (const Face& f : mesh.faces)
      out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " + std::to_string(f[2] + 1) + "\n";
    write_bytes(path, out);
    return;
  }
  if (ext != ".ply") throw Error("unsupported mesh format: " + path.string());
  write_bytes(path, ply_bytes(mesh.vertices, nullptr, &mesh.faces, format));
}

}  // namespace geofuse
