#pragma once

// Hand-built fixtures shared by the unit tests and the acceptance runner.

#include "geofuse/delaunay/tet_complex.hpp"

#include <filesystem>
#include <map>

namespace oracle {

using geofuse::Vec3;

// Three finite tets stacked on the z axis (C below B below A, target at the
// apex of A) plus three tets fanning out above the target so the tet behind
// it is finite. The view centre (origin) lies inside C.
struct ChainFixture {
  std::vector<Vec3> points;
  std::vector<std::array<std::int32_t, 4>> tets;
  std::int32_t target = 3;
  Vec3 center = Vec3::Zero();
  // Ids of A, B, C and the distances from the target to the C|B and B|A
  // crossings, worked out by hand.
  std::int32_t a = 0, b = 1, c = 2;
  double d_cb = 3.0, d_ba = 2.0;
};
ChainFixture chain_fixture();

// Edge key: node ids with -1 for the source and -2 for the sink.
using EdgeMap = std::map<std::pair<long, long>, double>;

struct GraphDump {
  std::size_t nodes = 0;
  double sentinel = 0.0;
  EdgeMap edges;
};
GraphDump parse_graph_dump(const std::filesystem::path& path);

// Capacities of the single-sight graph evaluated by hand (quality term off).
// The sentinel entries are left out; the caller checks them separately.
struct HandGraph {
  EdgeMap edges;            // every non-sentinel edge
  std::vector<long> tied;   // tets expected to carry the sentinel
  double finite_total = 0;  // sum of finite capacities
};
HandGraph hand_chain_graph(const geofuse::TetComplex& complex, const ChainFixture& fx, double alpha_max,
                           double sigma, double lambda_avw);

}  // namespace oracle
