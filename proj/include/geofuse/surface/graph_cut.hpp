#pragma once

#include "geofuse/delaunay/tet_complex.hpp"
#include "geofuse/visibility/visibility.hpp"

#include <filesystem>

namespace geofuse {

enum class VisibilityWeighting {
  kAdaptive,  // gamma from the endpoint tet's faces, mixed by lambda_avw
  kBaseline,  // gamma fixed to 1, never computed
};

struct EnergyParams {
  double alpha_max = 32.0;
  /// Soft-visibility decay scale in scene units; unset means 1% of the
  /// complex's bounding-box diagonal.
  std::optional<double> sigma_soft;
  double lambda_avw = 1.0;
  double lambda_ql = 1.0;
  VisibilityWeighting weighting = VisibilityWeighting::kAdaptive;

  /// Throws Error naming the first out-of-range field.
  void validate() const;
};

/// alpha_max * (1 - exp(-d^2 / (2 sigma^2))).
double soft_vis_weight(double distance, double alpha_max, double sigma_soft);

/// (1 - lambda) + lambda * clamp(max_i dot(ray, normals[i]), 0, 1).
double avw_gamma(const Vec3& ray, const std::vector<Vec3>& normals, double lambda_avw);

/// 2 * inradius / circumradius of a triangle: 1 when equilateral, 0 when
/// degenerate.
double facet_quality(const Vec3& a, const Vec3& b, const Vec3& c);

/// Capacitated graph with one node per tet plus a source and a sink.
/// Facet edges run from a tet to its neighbour across each slot.
struct StGraph {
  std::size_t tet_count = 0;
  std::vector<double> source;     // s -> tet, finite part
  std::vector<double> sink;       // tet -> t
  std::vector<double> facet;      // 4 per tet: tet -> neighbour across slot
  std::vector<std::int32_t> neighbor;
  std::vector<std::uint8_t> tied;  // s -> tet carries the sentinel
  double sentinel = 1.0;           // 1 + sum of every finite capacity

  [[nodiscard]] double source_capacity(std::size_t t) const { return tied[t] ? sentinel : source[t]; }

  /// ASCII: `nodes N`, `sentinel X`, then `s <tet> <cap>`, `<tet> t <cap>`
  /// and `<tet> <tet> <cap>` lines for every non-zero edge.
  void dump(const std::filesystem::path& path) const;
};

/// Endpoint (T_{M+1}) data for a line of sight, exposed for tests.
struct SightWeights {
  TetTraversal traversal;
  double gamma = 1.0;
};
SightWeights sight_weights(const TetComplex& complex, const LineOfSight& sight, const EnergyParams& params);

/// Accumulates every sight's contributions, then the symmetric quality
/// term on each facet with three finite vertices. The tet containing the
/// view centre and every infinite tet are tied to the source.
StGraph build_st_graph(const TetComplex& complex, const std::vector<LineOfSight>& sights,
                       const EnergyParams& params);

/// Directed network for max-flow; capacities are doubles.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes);
  void add_edge(std::size_t from, std::size_t to, double capacity);
  [[nodiscard]] std::size_t node_count() const { return head_.size(); }

  /// Dinic's algorithm. Afterwards source_side() holds residual
  /// reachability from s.
  double max_flow(std::size_t s, std::size_t t);
  [[nodiscard]] const std::vector<std::uint8_t>& source_side() const { return reach_; }
  /// Sum of original capacities of edges leaving the given side.
  [[nodiscard]] double cut_capacity(const std::vector<std::uint8_t>& side) const;

 private:
  struct Edge {
    std::uint32_t to;
    std::uint32_t next;
    double residual;
    double capacity;
  };
  bool bfs(std::size_t s, std::size_t t);
  double augment(std::size_t s, std::size_t t);

  std::vector<std::uint32_t> head_;
  std::vector<Edge> edges_;
  std::vector<std::int32_t> level_;
  std::vector<std::uint32_t> cursor_;
  std::vector<std::uint8_t> reach_;
};

enum class TetLabel : std::uint8_t { kOuter = 0, kInner = 1 };

struct CutResult {
  double flow = 0.0;
  double cut_capacity = 0.0;
  std::vector<TetLabel> labels;
};

/// Exact max-flow/min-cut; outer = reachable from s in the residual graph.
CutResult max_flow(const StGraph& graph);

/// Facets between outer and inner tets, normals pointing into the outer
/// tet. Vertices are compacted in ascending complex order. Facets touching
/// the infinite vertex are skipped.
TriangleMesh extract_surface(const TetComplex& complex, const std::vector<TetLabel>& labels);

}  // namespace geofuse
