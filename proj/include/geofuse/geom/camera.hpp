#pragma once

#include "geofuse/geom/types.hpp"

#include <variant>

namespace geofuse {

/// Pinhole camera. Camera frame: +x right, +y down, +z forward (principal
/// axis). `rotation` maps world directions into that frame.
class PinholeCamera {
 public:
  PinholeCamera() = default;
  PinholeCamera(const Vec3& center, const Mat3& rotation, double fov_deg, int width, int height);

  /// Looks from `center` toward `target` with world up +z; falls back to +x
  /// when the view direction is within 1 degree of +-z.
  static PinholeCamera look_at(const Vec3& center, const Vec3& target, double fov_deg = 60.0,
                               int width = 256, int height = 256);
  static PinholeCamera look_along(const Vec3& center, const Vec3& direction, double fov_deg = 60.0,
                                  int width = 256, int height = 256);

  [[nodiscard]] const Vec3& center() const { return center_; }
  [[nodiscard]] const Mat3& rotation() const { return rotation_; }
  [[nodiscard]] double fov_deg() const { return fov_deg_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] Vec3 forward() const { return rotation_.row(2).transpose(); }
  /// Focal length in pixels, from the vertical field of view.
  [[nodiscard]] double focal_px() const;

  /// Continuous pixel coordinates (u, v) of a world point; nullopt when the
  /// point is not strictly in front of the camera.
  [[nodiscard]] std::optional<Eigen::Vector2d> project(const Vec3& world) const;
  /// Unit world ray direction through continuous pixel coordinates.
  [[nodiscard]] Vec3 pixel_ray(double u, double v) const;
  /// World point at distance `depth` along the ray through pixel (u, v).
  [[nodiscard]] Vec3 unproject(double u, double v, double depth) const;

 private:
  Vec3 center_ = Vec3::Zero();
  Mat3 rotation_ = Mat3::Identity();
  double fov_deg_ = 60.0;
  int width_ = 256;
  int height_ = 256;
};

/// Full-sphere camera emitting `ray_count` Fibonacci-lattice rays.
struct PanoramicCamera {
  Vec3 center = Vec3::Zero();
  int ray_count = 4096;
};

using Camera = std::variant<PinholeCamera, PanoramicCamera>;
using ViewSet = std::vector<Camera>;

Vec3 camera_center(const Camera& camera);

}  // namespace geofuse
