#pragma once

#include "geofuse/geom/bvh.hpp"

namespace geofuse {

/// Static 3-d tree for exact nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  struct Nearest {
    std::int32_t index = -1;
    double distance = std::numeric_limits<double>::infinity();
  };
  [[nodiscard]] Nearest nearest(const Vec3& q) const;
  [[nodiscard]] std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::int32_t first, count;  // leaf range into order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };
  std::int32_t build(std::int32_t first, std::int32_t count);
  void search(std::int32_t node, const Vec3& q, Nearest& best, double& best_sq) const;

  std::vector<Vec3> points_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

/// Area-weighted uniform samples on the mesh surface (mt19937_64).
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count = 100'000, std::uint64_t seed = 42);

/// Distance from each point of `from` to its nearest point of `to`.
std::vector<double> nearest_distances(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

/// Symmetric mean of unsquared nearest-neighbour distances.
double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};
/// Precision: share of recon within tau of ref; recall: the converse.
FScore f_score(const std::vector<Vec3>& recon, const std::vector<Vec3>& ref, double tau);

/// Mean exact point-to-surface distance.
double mean_distance(const std::vector<Vec3>& recon, const Bvh& reference);

}  // namespace geofuse
