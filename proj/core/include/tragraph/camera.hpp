#pragma once

#include <Eigen/Core>
#include <string>

namespace tragraph {

// Pinhole camera. `rotation` and `translation` map world to camera:
// X_cam = rotation * X_world + translation. Pixel centers sit at integer
// coordinates, so pixel (x, y) samples u = x, v = y.
struct CameraView {
  int id = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;
  std::string image_ref;

  Eigen::Matrix3d intrinsics() const;
  Eigen::Matrix3d intrinsics_inverse() const;
  // Camera center in world coordinates.
  Eigen::Vector3d center() const;
  // Optical axis (camera +z) in world coordinates.
  Eigen::Vector3d forward() const;
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const;
  // Camera-frame ray through pixel (u, v) with unit z.
  Eigen::Vector3d pixel_ray(double u, double v) const;
  // Projects a camera-frame point. Caller guarantees z > 0.
  Eigen::Vector2d project_camera(const Eigen::Vector3d& cam) const;
};

// Checks fx, fy > 0, orthonormal rotation within 1e-9, finite pose and
// width, height >= min_size. Throws ValidationError.
void validate_view(const CameraView& view, int min_size = 16);

// Builds a world->camera rotation whose +z looks from `eye` to `target`,
// with camera +y roughly along -up.
CameraView look_at(int id, const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                   const Eigen::Vector3d& up, double focal, int width, int height);

}  // namespace tragraph
