#include "geofuse/geom/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace geofuse {

namespace {

// Slab test; returns the entry distance or nullopt.
std::optional<double> ray_box(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_min,
                              double t_max) {
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min[k] - origin[k]) * inv_dir[k];
    double t1 = (box.max[k] - origin[k]) * inv_dir[k];
    if (t0 > t1) std::swap(t0, t1);
    // NaN from 0 * inf leaves the interval untouched.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_min > t_max) return std::nullopt;
  }
  return t_min;
}

double box_distance_sq(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.max);
  return d.squaredNorm();
}

}  // namespace

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& direction, const Vec3& a,
                                         const Vec3& b, const Vec3& c) {
  int kz = 0;
  direction.cwiseAbs().maxCoeff(&kz);
  int kx = (kz + 1) % 3;
  int ky = (kx + 1) % 3;
  if (direction[kz] < 0.0) std::swap(kx, ky);
  const double sx = direction[kx] / direction[kz];
  const double sy = direction[ky] / direction[kz];
  const double sz = 1.0 / direction[kz];

  const Vec3 pa = a - origin, pb = b - origin, pc = c - origin;
  const double ax = pa[kx] - sx * pa[kz], ay = pa[ky] - sy * pa[kz];
  const double bx = pb[kx] - sx * pb[kz], by = pb[ky] - sy * pb[kz];
  const double cx = pc[kx] - sx * pc[kz], cy = pc[ky] - sy * pc[kz];

  double u = cx * by - cy * bx;
  double v = ax * cy - ay * cx;
  double w = bx * ay - by * ax;
  if (u == 0.0 || v == 0.0 || w == 0.0) {
    using ld = long double;
    u = static_cast<double>(static_cast<ld>(cx) * by - static_cast<ld>(cy) * bx);
    v = static_cast<double>(static_cast<ld>(ax) * cy - static_cast<ld>(ay) * cx);
    w = static_cast<double>(static_cast<ld>(bx) * ay - static_cast<ld>(by) * ax);
  }
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;
  const double det = u + v + w;
  if (det == 0.0) return std::nullopt;
  const double t = (u * sz * pa[kz] + v * sz * pb[kz] + w * sz * pc[kz]) / det;
  if (!std::isfinite(t)) return std::nullopt;
  return t;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

Bvh::Bvh(TriangleMesh mesh, int leaf_size) : mesh_(std::move(mesh)), leaf_size_(leaf_size) {
  if (mesh_.faces.empty()) throw Error("cannot build a BVH over an empty mesh");
  if (leaf_size_ < 1) throw Error("BVH leaf size must be positive");
  validate_mesh(mesh_);
  const auto n = static_cast<std::int32_t>(mesh_.faces.size());
  order_.resize(static_cast<std::size_t>(n));
  std::vector<Vec3> centroids(static_cast<std::size_t>(n));
  for (std::int32_t f = 0; f < n; ++f) {
    order_[static_cast<std::size_t>(f)] = f;
    const Face& tri = mesh_.faces[static_cast<std::size_t>(f)];
    centroids[static_cast<std::size_t>(f)] = (mesh_.vertices[tri[0]] + mesh_.vertices[tri[1]] + mesh_.vertices[tri[2]]) / 3.0;
  }
  nodes_.reserve(static_cast<std::size_t>(2 * n / leaf_size_ + 1));
  build(0, n, centroids);
  const double diag = nodes_.front().box.diagonal();
  ray_epsilon_ = diag > 0.0 ? 1e-6 * diag : 1e-12;
}

std::int32_t Bvh::build(std::int32_t first, std::int32_t count, std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, centroid_box;
  for (std::int32_t i = first; i < first + count; ++i) {
    const std::int32_t f = order_[static_cast<std::size_t>(i)];
    for (const auto v : mesh_.faces[static_cast<std::size_t>(f)]) box.extend(mesh_.vertices[static_cast<std::size_t>(v)]);
    centroid_box.extend(centroids[static_cast<std::size_t>(f)]);
  }
  nodes_[static_cast<std::size_t>(index)].box = box;
  if (count <= leaf_size_) {
    nodes_[static_cast<std::size_t>(index)].first = first;
    nodes_[static_cast<std::size_t>(index)].count = count;
    return index;
  }
  const int axis = centroid_box.longest_axis();
  const std::int32_t mid = first + count / 2;
  auto begin = order_.begin() + first;
  std::nth_element(begin, order_.begin() + mid, begin + count, [&](std::int32_t a, std::int32_t b) {
    const double ca = centroids[static_cast<std::size_t>(a)][axis];
    const double cb = centroids[static_cast<std::size_t>(b)][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const std::int32_t left = build(first, mid - first, centroids);
  const std::int32_t right = build(mid, first + count - mid, centroids);
  nodes_[static_cast<std::size_t>(index)].left = left;
  nodes_[static_cast<std::size_t>(index)].right = right;
  return index;
}

Hit Bvh::make_hit(const Ray& ray, double t, std::int32_t face) const {
  Hit hit;
  hit.t = t;
  hit.face = face;
  hit.point = ray.origin + t * ray.direction;
  hit.normal = mesh_.face_normal(static_cast<std::size_t>(face));
  return hit;
}

std::optional<Hit> Bvh::ray_cast(const Ray& ray) const {
  const double t_min = ray.min_range.value_or(ray_epsilon_);
  double best = ray.max_range.value_or(std::numeric_limits<double>::infinity());
  std::int32_t best_face = -1;
  const Vec3 inv = ray.direction.cwiseInverse();

  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (!ray_box(node.box, ray.origin, inv, t_min, best)) continue;
    if (node.is_leaf()) {
      for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
        const std::int32_t f = order_[static_cast<std::size_t>(i)];
        const Face& tri = mesh_.faces[static_cast<std::size_t>(f)];
        const auto t = intersect_triangle(ray.origin, ray.direction, mesh_.vertices[tri[0]],
                                          mesh_.vertices[tri[1]], mesh_.vertices[tri[2]]);
        if (t && *t > t_min && (*t < best || (*t == best && f < best_face))) {
          best = *t;
          best_face = f;
        }
      }
      continue;
    }
    // Visit the nearer child first.
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const auto tl = ray_box(l.box, ray.origin, inv, t_min, best);
    const auto tr = ray_box(r.box, ray.origin, inv, t_min, best);
    if (tl && tr) {
      if (*tl <= *tr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    } else if (tl) {
      stack[top++] = node.left;
    } else if (tr) {
      stack[top++] = node.right;
    }
  }
  if (best_face < 0) return std::nullopt;
  return make_hit(ray, best, best_face);
}

bool Bvh::occluded(const Vec3& origin, const Vec3& direction, double max_t) const {
  Ray ray;
  ray.origin = origin;
  ray.direction = direction;
  ray.max_range = max_t;
  const auto hit = ray_cast(ray);
  return hit && hit->t < max_t;
}

Bvh::Closest Bvh::closest_point(const Vec3& p) const {
  Closest best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (box_distance_sq(node.box, p) > best_sq) continue;
    if (node.is_leaf()) {
      for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
        const std::int32_t f = order_[static_cast<std::size_t>(i)];
        const Face& tri = mesh_.faces[static_cast<std::size_t>(f)];
        const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                                 mesh_.vertices[tri[2]]);
        const double d = (q - p).squaredNorm();
        if (d < best_sq) {
          best_sq = d;
          best.point = q;
          best.face = f;
        }
      }
      continue;
    }
    const double dl = box_distance_sq(nodes_[static_cast<std::size_t>(node.left)].box, p);
    const double dr = box_distance_sq(nodes_[static_cast<std::size_t>(node.right)].box, p);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace geofuse
