#include "tragraph/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "tragraph/error.hpp"

namespace tragraph {

Eigen::Matrix3d CameraView::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraView::intrinsics_inverse() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Vector3d CameraView::center() const { return -rotation.transpose() * translation; }

Eigen::Vector3d CameraView::forward() const { return rotation.row(2).transpose(); }

Eigen::Vector3d CameraView::to_camera(const Eigen::Vector3d& world) const { return rotation * world + translation; }

Eigen::Vector3d CameraView::pixel_ray(double u, double v) const {
  return Eigen::Vector3d((u - cx) / fx, (v - cy) / fy, 1.0);
}

Eigen::Vector2d CameraView::project_camera(const Eigen::Vector3d& cam) const {
  return Eigen::Vector2d(fx * cam.x() / cam.z() + cx, fy * cam.y() / cam.z() + cy);
}

void validate_view(const CameraView& view, int min_size) {
  const std::string name = "view " + std::to_string(view.id);
  if (!(view.fx > 0.0) || !(view.fy > 0.0)) throw ValidationError(name + ": focal lengths must be positive");
  if (!std::isfinite(view.cx) || !std::isfinite(view.cy)) throw ValidationError(name + ": non-finite principal point");
  if (view.width < min_size || view.height < min_size)
    throw ValidationError(name + ": image must be at least " + std::to_string(min_size) + " pixels per side");
  if (!view.rotation.allFinite() || !view.translation.allFinite())
    throw ValidationError(name + ": non-finite pose");
  const double err = (view.rotation.transpose() * view.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-9) throw ValidationError(name + ": rotation is not orthonormal");
}

CameraView look_at(int id, const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                   double focal, int width, int height) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = z.cross(up);
  if (x.norm() < 1e-9) x = z.unitOrthogonal();
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  CameraView view;
  view.id = id;
  view.fx = focal;
  view.fy = focal;
  view.cx = 0.5 * (width - 1);
  view.cy = 0.5 * (height - 1);
  view.rotation.row(0) = x.transpose();
  view.rotation.row(1) = y.transpose();
  view.rotation.row(2) = z.transpose();
  view.translation = -view.rotation * eye;
  view.width = width;
  view.height = height;
  return view;
}

}  // namespace tragraph
