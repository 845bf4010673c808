#include "geofuse/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace geofuse {

namespace {

constexpr std::int32_t kLeafSize = 8;

void require_points(const std::vector<Vec3>& pts, const char* what) {
  if (pts.empty()) throw Error(std::string(what) + ": empty point set");
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  require_points(points_, "KdTree");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  build(0, static_cast<std::int32_t>(points_.size()));
}

std::int32_t KdTree::build(std::int32_t first, std::int32_t count) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({first, count});
  if (count <= kLeafSize) return id;
  Aabb box;
  for (std::int32_t i = first; i < first + count; ++i) box.extend(points_[static_cast<std::size_t>(order_[i])]);
  const int axis = box.longest_axis();
  const std::int32_t mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](std::int32_t a, std::int32_t b) {
                     return points_[static_cast<std::size_t>(a)][axis] < points_[static_cast<std::size_t>(b)][axis];
                   });
  const double split = points_[static_cast<std::size_t>(order_[mid])][axis];
  const std::int32_t left = build(first, mid - first);
  const std::int32_t right = build(mid, first + count - mid);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.left = left;
  n.right = right;
  n.axis = axis;
  n.split = split;
  return id;
}

void KdTree::search(std::int32_t node, const Vec3& q, Nearest& best, double& best_sq) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::int32_t i = n.first; i < n.first + n.count; ++i) {
      const std::int32_t idx = order_[static_cast<std::size_t>(i)];
      const double d = (points_[static_cast<std::size_t>(idx)] - q).squaredNorm();
      if (d < best_sq || (d == best_sq && idx < best.index)) {
        best_sq = d;
        best.index = idx;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right >= split.
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff <= 0 ? n.left : n.right;
  const std::int32_t far = diff <= 0 ? n.right : n.left;
  search(near, q, best, best_sq);
  if (diff * diff <= best_sq) search(far, q, best, best_sq);
}

KdTree::Nearest KdTree::nearest(const Vec3& q) const {
  Nearest best;
  double best_sq = std::numeric_limits<double>::infinity();
  search(0, q, best, best_sq);
  best.distance = std::sqrt(best_sq);
  return best;
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  std::vector<double> cdf;
  cdf.reserve(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) cdf.push_back(total += mesh.face_area(f));
  if (!(total > 0)) throw Error("sample_surface: mesh has no area");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = uni(rng) * total;
    auto f = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    f = std::min(f, cdf.size() - 1);
    double u = uni(rng), v = uni(rng);
    if (u + v > 1.0) u = 1.0 - u, v = 1.0 - v;
    const auto& face = mesh.faces[f];
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(face[0])];
    out.push_back(a + u * (mesh.vertices[static_cast<std::size_t>(face[1])] - a) +
                  v * (mesh.vertices[static_cast<std::size_t>(face[2])] - a));
  }
  return out;
}

std::vector<double> nearest_distances(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  const KdTree tree(to);
  std::vector<double> out;
  out.reserve(from.size());
  for (const Vec3& p : from) out.push_back(tree.nearest(p).distance);
  return out;
}

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  require_points(a, "chamfer_distance");
  require_points(b, "chamfer_distance");
  return 0.5 * (mean(nearest_distances(a, b)) + mean(nearest_distances(b, a)));
}

FScore f_score(const std::vector<Vec3>& recon, const std::vector<Vec3>& ref, double tau) {
  if (!(tau > 0)) throw Error("f_score: threshold must be positive");
  require_points(recon, "f_score");
  require_points(ref, "f_score");
  auto share = [tau](const std::vector<double>& d) {
    return static_cast<double>(std::count_if(d.begin(), d.end(), [tau](double x) { return x <= tau; })) /
           static_cast<double>(d.size());
  };
  FScore s;
  s.precision = share(nearest_distances(recon, ref));
  s.recall = share(nearest_distances(ref, recon));
  const double sum = s.precision + s.recall;
  s.fscore = sum > 0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

double mean_distance(const std::vector<Vec3>& recon, const Bvh& reference) {
  require_points(recon, "mean_distance");
  double total = 0.0;
  for (const Vec3& p : recon) total += reference.closest_point(p).distance;
  return total / static_cast<double>(recon.size());
}

}  // namespace geofuse
