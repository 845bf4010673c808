#include "geofuse/surface/graph_cut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace geofuse {

void EnergyParams::validate() const {
  if (!(alpha_max > 0) || !std::isfinite(alpha_max)) throw Error("alpha_max must be a positive number");
  if (sigma_soft && (!(*sigma_soft > 0) || !std::isfinite(*sigma_soft))) {
    throw Error("sigma_soft must be a positive number");
  }
  if (!(lambda_avw >= 0 && lambda_avw <= 1)) throw Error("lambda_avw must lie in [0, 1]");
  if (!(lambda_ql >= 0) || !std::isfinite(lambda_ql)) throw Error("lambda_ql must be non-negative");
}

double soft_vis_weight(double distance, double alpha_max, double sigma_soft) {
  return alpha_max * (1.0 - std::exp(-(distance * distance) / (2.0 * sigma_soft * sigma_soft)));
}

double avw_gamma(const Vec3& ray, const std::vector<Vec3>& normals, double lambda_avw) {
  double best = 0.0;
  for (const Vec3& n : normals) best = std::max(best, ray.dot(n));
  best = std::min(best, 1.0);
  return (1.0 - lambda_avw) + lambda_avw * best;
}

double facet_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const double s = 0.5 * (la + lb + lc);
  const double denom = s * la * lb * lc;
  if (!(denom > 0) || !(area > 0)) return 0.0;
  // r = area / s, R = la lb lc / (4 area)
  return std::clamp(8.0 * area * area / denom, 0.0, 1.0);
}

void StGraph::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "nodes " << tet_count + 2 << "\n";
  out << "sentinel " << sentinel << "\n";
  for (std::size_t t = 0; t < tet_count; ++t) {
    if (const double c = source_capacity(t); c > 0) out << "s " << t << ' ' << c << '\n';
  }
  for (std::size_t t = 0; t < tet_count; ++t) {
    if (sink[t] > 0) out << t << " t " << sink[t] << '\n';
  }
  for (std::size_t t = 0; t < tet_count; ++t) {
    for (int i = 0; i < 4; ++i) {
      const double c = facet[4 * t + static_cast<std::size_t>(i)];
      if (c > 0) out << t << ' ' << neighbor[4 * t + static_cast<std::size_t>(i)] << ' ' << c << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

namespace {

double default_sigma(const TetComplex& complex, const EnergyParams& params) {
  if (params.sigma_soft) return *params.sigma_soft;
  return 0.01 * bounds_of(complex.vertices()).diagonal();
}

// Inward unit normals of the finite faces of tet t that contain vertex v.
std::vector<Vec3> faces_at_vertex(const TetComplex& complex, std::int32_t t, std::int32_t v) {
  std::vector<Vec3> normals;
  const Tet& tet = complex.tet(t);
  for (int i = 0; i < 4; ++i) {
    if (tet.v[i] == v || tet.v[i] == kInfiniteVertex) continue;
    const auto f = complex.face(t, i);
    if (std::find(f.begin(), f.end(), kInfiniteVertex) != f.end()) continue;
    const Vec3& a = complex.point(f[0]);
    const Vec3 n = (complex.point(f[1]) - a).cross(complex.point(f[2]) - a);
    const double len = n.norm();
    if (len > 0) normals.push_back(-n / len);  // face() is outward ordered
  }
  return normals;
}

}  // namespace

SightWeights sight_weights(const TetComplex& complex, const LineOfSight& sight, const EnergyParams& params) {
  SightWeights w;
  w.traversal = traverse_ray(complex, sight.point, sight.center);
  if (params.weighting == VisibilityWeighting::kAdaptive) {
    const Vec3 ray = (complex.point(sight.point) - sight.center).normalized();
    w.gamma = avw_gamma(ray, faces_at_vertex(complex, w.traversal.behind, sight.point), params.lambda_avw);
  }
  return w;
}

StGraph build_st_graph(const TetComplex& complex, const std::vector<LineOfSight>& sights,
                       const EnergyParams& params) {
  params.validate();
  const double sigma = default_sigma(complex, params);
  if (!(sigma > 0)) throw Error("build_st_graph: zero soft-visibility scale (degenerate complex)");
  const std::size_t n = complex.tet_count();
  StGraph g;
  g.tet_count = n;
  g.source.assign(n, 0.0);
  g.sink.assign(n, 0.0);
  g.facet.assign(4 * n, 0.0);
  g.neighbor.resize(4 * n);
  g.tied.assign(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const Tet& tet = complex.tet(static_cast<std::int32_t>(t));
    for (int i = 0; i < 4; ++i) g.neighbor[4 * t + static_cast<std::size_t>(i)] = tet.n[i];
    if (complex.is_infinite(static_cast<std::int32_t>(t))) g.tied[t] = 1;
  }

  const double alpha_sink = soft_vis_weight(sigma, params.alpha_max, sigma);
  for (std::size_t k = 0; k < sights.size(); ++k) {
    const LineOfSight& sight = sights[k];
    if (sight.point < 0 || static_cast<std::size_t>(sight.point) >= complex.vertex_count()) {
      throw Error("line of sight " + std::to_string(k) + ": unknown vertex " + std::to_string(sight.point));
    }
    const SightWeights w = sight_weights(complex, sight, params);
    const auto& tets = w.traversal.tets;
    g.tied[static_cast<std::size_t>(tets.front())] = 1;
    for (std::size_t i = 0; i + 1 < tets.size(); ++i) {
      const auto t = static_cast<std::size_t>(tets[i]);
      const Tet& tet = complex.tet(tets[i]);
      const double c = w.gamma * soft_vis_weight(w.traversal.crossing_distance[i], params.alpha_max, sigma);
      for (int s = 0; s < 4; ++s) {
        if (tet.n[s] == tets[i + 1]) g.facet[4 * t + static_cast<std::size_t>(s)] += c;
      }
    }
    g.sink[static_cast<std::size_t>(w.traversal.behind)] += w.gamma * alpha_sink;
  }

  if (params.lambda_ql > 0) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto ti = static_cast<std::int32_t>(t);
      for (int i = 0; i < 4; ++i) {
        const std::int32_t u = complex.tet(ti).n[i];
        if (u < ti) continue;  // each facet once, from its lower-id tet
        // Interior facets only: hull facets border an infinite tet.
        if (complex.is_infinite(ti) || complex.is_infinite(u)) continue;
        const auto f = complex.face(ti, i);
        const double c = params.lambda_ql * facet_quality(complex.point(f[0]), complex.point(f[1]), complex.point(f[2]));
        g.facet[4 * t + static_cast<std::size_t>(i)] += c;
        g.facet[4 * static_cast<std::size_t>(u) + static_cast<std::size_t>(complex.mirror_slot(ti, i))] += c;
      }
    }
  }

  double total = 0.0;
  for (double c : g.source) total += c;
  for (double c : g.sink) total += c;
  for (double c : g.facet) total += c;
  g.sentinel = 1.0 + total;
  return g;
}

FlowNetwork::FlowNetwork(std::size_t nodes) : head_(nodes, UINT32_MAX) {}

void FlowNetwork::add_edge(std::size_t from, std::size_t to, double capacity) {
  if (capacity < 0) throw Error("FlowNetwork: negative capacity");
  const auto e = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back({static_cast<std::uint32_t>(to), head_[from], capacity, capacity});
  head_[from] = e;
  edges_.push_back({static_cast<std::uint32_t>(from), head_[to], 0.0, 0.0});
  head_[to] = e + 1;
}

bool FlowNetwork::bfs(std::size_t s, std::size_t t) {
  level_.assign(head_.size(), -1);
  std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(s)};
  level_[s] = 0;
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const auto u = queue[k];
    for (auto e = head_[u]; e != UINT32_MAX; e = edges_[e].next) {
      const Edge& edge = edges_[e];
      if (edge.residual > 0 && level_[edge.to] < 0) {
        level_[edge.to] = level_[u] + 1;
        queue.push_back(edge.to);
      }
    }
  }
  return level_[t] >= 0;
}

// One blocking-flow phase with an explicit stack. Each augmentation drains
// its bottleneck edge to exactly zero, so phases terminate as in the
// integer case.
double FlowNetwork::augment(std::size_t s, std::size_t t) {
  cursor_ = head_;
  double total = 0.0;
  std::vector<std::uint32_t> path;  // edge ids from s
  std::size_t u = s;
  for (;;) {
    if (u == t) {
      double f = std::numeric_limits<double>::infinity();
      for (auto e : path) f = std::min(f, edges_[e].residual);
      std::size_t cut = 0;
      for (std::size_t k = 0; k < path.size(); ++k) {
        Edge& e = edges_[path[k]];
        e.residual = e.residual == f ? 0.0 : e.residual - f;
        edges_[path[k] ^ 1u].residual += f;
        if (e.residual == 0.0 && cut == 0) cut = k + 1;
      }
      total += f;
      // Resume from the tail of the first saturated edge.
      path.resize(cut - 1);
      u = path.empty() ? s : edges_[path.back()].to;
      continue;
    }
    auto& e = cursor_[u];
    while (e != UINT32_MAX) {
      const Edge& edge = edges_[e];
      if (edge.residual > 0 && level_[edge.to] == level_[u] + 1) break;
      e = edge.next;
    }
    if (e != UINT32_MAX) {
      path.push_back(e);
      u = edges_[e].to;
      continue;
    }
    // Dead end: retreat and skip the edge that led here.
    if (path.empty()) break;
    level_[u] = -1;
    path.pop_back();
    u = path.empty() ? s : edges_[path.back()].to;
    cursor_[u] = edges_[cursor_[u]].next;
  }
  return total;
}

double FlowNetwork::max_flow(std::size_t s, std::size_t t) {
  if (s == t) throw Error("FlowNetwork: source equals sink");
  double flow = 0.0;
  while (bfs(s, t)) flow += augment(s, t);
  // The failed BFS left the residual reachability in level_.
  reach_.assign(head_.size(), 0);
  for (std::size_t v = 0; v < level_.size(); ++v) reach_[v] = level_[v] >= 0;
  return flow;
}

double FlowNetwork::cut_capacity(const std::vector<std::uint8_t>& side) const {
  double total = 0.0;
  for (std::size_t u = 0; u < head_.size(); ++u) {
    if (!side[u]) continue;
    for (auto e = head_[u]; e != UINT32_MAX; e = edges_[e].next) {
      if (!side[edges_[e].to]) total += edges_[e].capacity;
    }
  }
  return total;
}

CutResult max_flow(const StGraph& graph) {
  const std::size_t n = graph.tet_count;
  const std::size_t s = n, t = n + 1;
  FlowNetwork net(n + 2);
  for (std::size_t v = 0; v < n; ++v) {
    if (const double c = graph.source_capacity(v); c > 0) net.add_edge(s, v, c);
    if (graph.sink[v] > 0) net.add_edge(v, t, graph.sink[v]);
    for (std::size_t i = 0; i < 4; ++i) {
      const double c = graph.facet[4 * v + i];
      if (c > 0) net.add_edge(v, static_cast<std::size_t>(graph.neighbor[4 * v + i]), c);
    }
  }
  CutResult result;
  result.flow = net.max_flow(s, t);
  result.cut_capacity = net.cut_capacity(net.source_side());
  result.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    result.labels[v] = net.source_side()[v] ? TetLabel::kOuter : TetLabel::kInner;
  }
  return result;
}

TriangleMesh extract_surface(const TetComplex& complex, const std::vector<TetLabel>& labels) {
  if (labels.size() != complex.tet_count()) throw Error("extract_surface: one label per tet expected");
  std::vector<Face> faces;
  for (std::int32_t t = 0; t < static_cast<std::int32_t>(complex.tet_count()); ++t) {
    if (labels[static_cast<std::size_t>(t)] != TetLabel::kInner) continue;
    const Tet& tet = complex.tet(t);
    for (int i = 0; i < 4; ++i) {
      if (labels[static_cast<std::size_t>(tet.n[i])] != TetLabel::kOuter) continue;
      // Outward from the inner tet, i.e. into the outer one.
      const auto f = complex.face(t, i);
      if (std::find(f.begin(), f.end(), kInfiniteVertex) != f.end()) continue;
      faces.push_back({f[0], f[1], f[2]});
    }
  }
  std::vector<std::int32_t> remap(complex.vertex_count(), -1);
  for (const auto& f : faces) {
    for (auto v : f) remap[static_cast<std::size_t>(v)] = 0;
  }
  TriangleMesh mesh;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<std::int32_t>(mesh.vertices.size());
    mesh.vertices.push_back(complex.point(static_cast<std::int32_t>(v)));
  }
  for (auto& f : faces) {
    for (auto& v : f) v = remap[static_cast<std::size_t>(v)];
  }
  mesh.faces = std::move(faces);
  return mesh;
}

}  // namespace geofuse
