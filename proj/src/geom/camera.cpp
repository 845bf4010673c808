#include "geofuse/geom/camera.hpp"

#include <cmath>
#include <numbers>

namespace geofuse {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Mat3 look_rotation(const Vec3& direction) {
  const Vec3 forward = direction.normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(forward.z()) > std::cos(1.0 * kDegToRad)) up = Vec3::UnitX();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return r;
}

}  // namespace

PinholeCamera::PinholeCamera(const Vec3& center, const Mat3& rotation, double fov_deg, int width,
                             int height)
    : center_(center), rotation_(rotation), fov_deg_(fov_deg), width_(width), height_(height) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error("field of view must lie in (0, 180) degrees");
  if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
  if (!(rotation * rotation.transpose()).isIdentity(1e-9)) throw Error("camera rotation is not orthonormal");
  if (!center.allFinite()) throw Error("camera center is not finite");
}

PinholeCamera PinholeCamera::look_at(const Vec3& center, const Vec3& target, double fov_deg, int width,
                                     int height) {
  const Vec3 dir = target - center;
  if (dir.norm() == 0.0) throw Error("look-at target coincides with the camera center");
  return {center, look_rotation(dir), fov_deg, width, height};
}

PinholeCamera PinholeCamera::look_along(const Vec3& center, const Vec3& direction, double fov_deg,
                                        int width, int height) {
  if (direction.norm() == 0.0) throw Error("view direction is zero");
  return {center, look_rotation(direction), fov_deg, width, height};
}

double PinholeCamera::focal_px() const {
  return 0.5 * static_cast<double>(height_) / std::tan(0.5 * fov_deg_ * kDegToRad);
}

std::optional<Eigen::Vector2d> PinholeCamera::project(const Vec3& world) const {
  const Vec3 pc = rotation_ * (world - center_);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double f = focal_px();
  return Eigen::Vector2d(f * pc.x() / pc.z() + 0.5 * width_, f * pc.y() / pc.z() + 0.5 * height_);
}

Vec3 PinholeCamera::pixel_ray(double u, double v) const {
  const double f = focal_px();
  const Vec3 dc((u - 0.5 * width_) / f, (v - 0.5 * height_) / f, 1.0);
  return (rotation_.transpose() * dc).normalized();
}

Vec3 PinholeCamera::unproject(double u, double v, double depth) const {
  return center_ + depth * pixel_ray(u, v);
}

Vec3 camera_center(const Camera& camera) {
  return std::visit([](const auto& c) -> Vec3 {
    if constexpr (std::is_same_v<std::decay_t<decltype(c)>, PinholeCamera>) {
      return c.center();
    } else {
      return c.center;
    }
  }, camera);
}

}  // namespace geofuse
