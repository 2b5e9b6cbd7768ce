#include "tragraph/raster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "tragraph/error.hpp"

namespace tragraph {

std::optional<Projected2D> project_gaussian(const Gaussian& g, const CameraView& view) {
  const Eigen::Vector3d cam = view.to_camera(g.position);
  if (!(cam.z() > kNearPlane)) return std::nullopt;

  const double z = cam.z();
  Eigen::Matrix<double, 2, 3> jacobian;
  jacobian << view.fx / z, 0.0, -view.fx * cam.x() / (z * z),  //
      0.0, view.fy / z, -view.fy * cam.y() / (z * z);
  const Eigen::Matrix<double, 2, 3> t = jacobian * view.rotation;
  const Eigen::Matrix3d sigma = build_covariance(g.rotation, g.log_scales);

  Projected2D p;
  p.camera_point = cam;
  p.depth = z;
  p.mean2d = view.project_camera(cam);
  p.cov2d = t * sigma * t.transpose();
  p.cov2d(0, 1) = p.cov2d(1, 0) = 0.5 * (p.cov2d(0, 1) + p.cov2d(1, 0));
  p.cov2d(0, 0) += kLowPassDilation;
  p.cov2d(1, 1) += kLowPassDilation;

  const double det = p.cov2d.determinant();
  if (!(det > 0.0)) return std::nullopt;
  p.conic = Eigen::Vector3d(p.cov2d(1, 1) / det, -p.cov2d(0, 1) / det, p.cov2d(0, 0) / det);

  // 3-sigma axis-aligned extent of the ellipse against the pixel-centre rectangle.
  const double ext_x = 3.0 * std::sqrt(p.cov2d(0, 0));
  const double ext_y = 3.0 * std::sqrt(p.cov2d(1, 1));
  if (p.mean2d.x() + ext_x < 0.0 || p.mean2d.x() - ext_x > view.width - 1 || p.mean2d.y() + ext_y < 0.0 ||
      p.mean2d.y() - ext_y > view.height - 1)
    return std::nullopt;
  if (!p.mean2d.allFinite()) return std::nullopt;
  return p;
}

namespace {

int smallest_axis(const Eigen::Vector3d& log_scales) {
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (log_scales[k] < log_scales[axis]) axis = k;
  return axis;
}

}  // namespace

Eigen::Vector3d gaussian_normal(const Gaussian& g, const CameraView& view) {
  const int axis = smallest_axis(g.log_scales);
  Eigen::Vector3d n = view.rotation * rotation_matrix(g.rotation).col(axis);
  if (n.dot(view.to_camera(g.position)) > 0.0) n = -n;
  return n;
}

bool splat_before(const Projected2D& a, const Projected2D& b, const GaussianSet& set) {
  if (a.depth != b.depth) return a.depth < b.depth;
  const auto& pa = set.gaussians[a.source].position;
  const auto& pb = set.gaussians[b.source].position;
  for (int k = 0; k < 3; ++k)
    if (pa[k] != pb[k]) return pa[k] < pb[k];
  return a.source < b.source;
}

RasterPlan plan_raster(const GaussianSet& set, const CameraView& view, const RasterSettings& settings) {
  validate_gaussians(set);
  RasterPlan plan;
  plan.splats.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (auto p = project_gaussian(set.gaussians[i], view)) {
      p->source = static_cast<int>(i);
      plan.splats.push_back(*p);
    }
  }
  std::sort(plan.splats.begin(), plan.splats.end(),
            [&set](const Projected2D& a, const Projected2D& b) { return splat_before(a, b, set); });

  plan.normals.resize(plan.splats.size());
  plan.normal_signs.resize(plan.splats.size());
  plan.normal_axis.resize(plan.splats.size());
  for (std::size_t s = 0; s < plan.splats.size(); ++s) {
    const Gaussian& g = set.gaussians[plan.splats[s].source];
    const int axis = smallest_axis(g.log_scales);
    Eigen::Vector3d n = view.rotation * rotation_matrix(g.rotation).col(axis);
    double sign = 1.0;
    if (n.dot(plan.splats[s].camera_point) > 0.0) sign = -1.0;
    plan.normals[s] = sign * n;
    plan.normal_signs[s] = sign;
    plan.normal_axis[s] = axis;
  }

  plan.tiles_x = (view.width + kTileSize - 1) / kTileSize;
  plan.tiles_y = (view.height + kTileSize - 1) / kTileSize;
  plan.tile_lists.assign(static_cast<std::size_t>(plan.tiles_x) * plan.tiles_y, {});
  for (std::size_t s = 0; s < plan.splats.size(); ++s) {
    const Projected2D& p = plan.splats[s];
    const double alpha = set.gaussians[p.source].opacity();
    int x0 = 0, y0 = 0, x1 = view.width - 1, y1 = view.height - 1;
    if (settings.min_alpha > 0.0) {
      if (alpha < settings.min_alpha) continue;
      // Outside this circle alpha * G < min_alpha, so the term is skipped anyway.
      const double a = p.cov2d(0, 0), b = p.cov2d(0, 1), c = p.cov2d(1, 1);
      const double lambda_max = 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      const double m2 = 2.0 * std::log(alpha / settings.min_alpha);
      const double r = std::sqrt(std::max(0.0, m2 * lambda_max)) * (1.0 + 1e-9) + 1e-9;
      x0 = std::max(x0, static_cast<int>(std::ceil(p.mean2d.x() - r)));
      y0 = std::max(y0, static_cast<int>(std::ceil(p.mean2d.y() - r)));
      x1 = std::min(x1, static_cast<int>(std::floor(p.mean2d.x() + r)));
      y1 = std::min(y1, static_cast<int>(std::floor(p.mean2d.y() + r)));
      if (x0 > x1 || y0 > y1) continue;
    }
    for (int ty = y0 / kTileSize; ty <= y1 / kTileSize; ++ty)
      for (int tx = x0 / kTileSize; tx <= x1 / kTileSize; ++tx)
        plan.tile_lists[static_cast<std::size_t>(ty) * plan.tiles_x + tx].push_back(static_cast<int>(s));
  }
  return plan;
}

FrameBuffers render_plan(const GaussianSet& set, const RasterPlan& plan, const CameraView& view,
                         const RasterSettings& settings) {
  FrameBuffers fb;
  fb.color = Image(view.width, view.height);
  const std::size_t n = static_cast<std::size_t>(view.width) * view.height;
  fb.depth.assign(n, 0.0);
  fb.normal.assign(n, Eigen::Vector3d::Zero());
  fb.accum_opacity.assign(n, 0.0);

  std::vector<double> opacity(plan.splats.size());
  std::vector<double> cutoff(plan.splats.size());
  for (std::size_t s = 0; s < plan.splats.size(); ++s) {
    opacity[s] = set.gaussians[plan.splats[s].source].opacity();
    cutoff[s] = skip_power(opacity[s], settings.min_alpha);
  }

  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      const auto& list = plan.tile_lists[static_cast<std::size_t>(y / kTileSize) * plan.tiles_x + x / kTileSize];
      double transmittance = 1.0;
      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      Eigen::Vector3d normal = Eigen::Vector3d::Zero();
      double depth = 0.0;
      double accum = 0.0;
      for (int s : list) {
        const Projected2D& p = plan.splats[s];
        const double dx = x - p.mean2d.x();
        const double dy = y - p.mean2d.y();
        const double power = -0.5 * (p.conic[0] * dx * dx + 2.0 * p.conic[1] * dx * dy + p.conic[2] * dy * dy);
        if (power < cutoff[s]) continue;
        const double alpha = std::min(kMaxAlpha, opacity[s] * std::exp(power));
        if (alpha < settings.min_alpha) continue;
        const double weight = alpha * transmittance;
        color += weight * set.gaussians[p.source].color;
        depth += weight * p.depth;
        normal += weight * plan.normals[s];
        accum += weight;
        transmittance *= 1.0 - alpha;
        if (transmittance < settings.min_transmittance) break;
      }
      const std::size_t i = fb.index(x, y);
      const Eigen::Vector3d out = color + transmittance * settings.background;
      for (int c = 0; c < 3; ++c) fb.color.at(x, y, c) = out[c];
      fb.accum_opacity[i] = accum;
      if (accum > kAccumEpsilon) {
        fb.depth[i] = depth / accum;
        const double len = normal.norm();
        fb.normal[i] = len > 1e-12 ? Eigen::Vector3d(normal / len) : Eigen::Vector3d(0.0, 0.0, -1.0);
      }
    }
  }
  return fb;
}

FrameBuffers rasterize(const GaussianSet& set, const CameraView& view, const RasterSettings& settings) {
  const RasterPlan plan = plan_raster(set, view, settings);
  return render_plan(set, plan, view, settings);
}

}  // namespace tragraph
