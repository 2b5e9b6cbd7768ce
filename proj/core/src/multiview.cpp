#include "tragraph/multiview.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tragraph/error.hpp"

namespace tragraph {

std::optional<PixelPlane> pixel_plane(const FrameBuffers& buffers, const CameraView& view, int x, int y,
                                      double opacity_gate) {
  const std::size_t i = buffers.index(x, y);
  if (!(buffers.accum_opacity[i] > opacity_gate)) return std::nullopt;
  PixelPlane plane;
  plane.normal = buffers.normal[i];
  plane.point = buffers.depth[i] * view.pixel_ray(x, y);
  plane.distance = -plane.normal.dot(plane.point);
  if (!(plane.distance > kNearPlane)) return std::nullopt;
  return plane;
}

void relative_pose(const CameraView& ref, const CameraView& src, Eigen::Matrix3d* rotation,
                   Eigen::Vector3d* translation) {
  *rotation = src.rotation * ref.rotation.transpose();
  *translation = src.translation - *rotation * ref.translation;
}

Eigen::Matrix3d homography(const CameraView& ref, const CameraView& src, const PixelPlane& plane) {
  if (std::abs(plane.distance) < 1e-6) throw DegenerateError("plane passes through the reference camera centre");
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  relative_pose(ref, src, &r, &t);
  return src.intrinsics() * (r - t * plane.normal.transpose() / plane.distance) * ref.intrinsics_inverse();
}

std::optional<Eigen::Vector2d> apply_homography(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d v = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(v.z()) < 1e-12) return std::nullopt;
  return Eigen::Vector2d(v.x() / v.z(), v.y() / v.z());
}

std::optional<Eigen::Vector2d> warp_pixel(const Eigen::Matrix3d& h, const Eigen::Vector2d& p, int width,
                                          int height) {
  auto q = apply_homography(h, p);
  if (!q) return std::nullopt;
  if (!(q->x() >= 0.0 && q->x() <= width - 1 && q->y() >= 0.0 && q->y() <= height - 1)) return std::nullopt;
  return q;
}

std::optional<Patch> extract_patch(const GrayImage& image, int x, int y, int half_width) {
  if (x - half_width < 0 || y - half_width < 0 || x + half_width >= image.width || y + half_width >= image.height)
    return std::nullopt;
  Patch patch;
  patch.center = Eigen::Vector2i(x, y);
  patch.half_width = half_width;
  patch.intensities.reserve(static_cast<std::size_t>(2 * half_width + 1) * (2 * half_width + 1));
  for (int dy = -half_width; dy <= half_width; ++dy)
    for (int dx = -half_width; dx <= half_width; ++dx) patch.intensities.push_back(image.at(x + dx, y + dy));
  return patch;
}

std::optional<double> ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("ncc: patch sizes differ");
  if (a.empty()) return std::nullopt;
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa / n < kNccVarianceFloor || sbb / n < kNccVarianceFloor) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> ncc(const Patch& a, const Patch& b) {
  if (a.half_width != b.half_width) throw ArgumentError("ncc: patch sizes differ");
  return ncc(std::span<const double>(a.intensities), std::span<const double>(b.intensities));
}

std::vector<Eigen::Vector2i> mv_candidates(const FrameBuffers& buffers, const CameraView& view, int half_width,
                                           double opacity_gate) {
  std::vector<Eigen::Vector2i> out;
  for (int y = half_width; y + half_width < buffers.height(); ++y)
    for (int x = half_width; x + half_width < buffers.width(); ++x)
      if (pixel_plane(buffers, view, x, y, opacity_gate)) out.emplace_back(x, y);
  return out;
}

std::vector<Eigen::Vector2i> sample_mv_pixels(const FrameBuffers& buffers, const CameraView& view, int half_width,
                                              int count, std::mt19937_64& rng) {
  auto candidates = mv_candidates(buffers, view, half_width);
  if (count < 0 || static_cast<std::size_t>(count) >= candidates.size()) return candidates;
  // Partial Fisher-Yates.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), candidates.size() - 1);
    std::swap(candidates[static_cast<std::size_t>(i)], candidates[pick(rng)]);
  }
  candidates.resize(static_cast<std::size_t>(count));
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.y() != b.y() ? a.y() < b.y() : a.x() < b.x(); });
  return candidates;
}

MultiViewResult loss_mv(const FrameBuffers& buffers, const CameraView& ref_view, const GrayImage& ref_gray,
                        std::span<const MultiViewNeighbor> neighbors, std::span<const Eigen::Vector2i> samples,
                        int half_width, bool with_gradients) {
  MultiViewResult result;
  const std::size_t pixels = static_cast<std::size_t>(buffers.width()) * buffers.height();
  if (with_gradients) {
    result.grad_depth.assign(pixels, 0.0);
    result.grad_normal.assign(pixels, Eigen::Vector3d::Zero());
  }
  const int side = 2 * half_width + 1;
  const std::size_t patch_size = static_cast<std::size_t>(side) * side;
  std::vector<double> warped(patch_size), ddx(patch_size), ddy(patch_size);
  std::vector<Eigen::Vector3d> homog(patch_size);

  double sum = 0.0;
  for (const Eigen::Vector2i& p : samples) {
    const auto plane = pixel_plane(buffers, ref_view, p.x(), p.y());
    if (!plane) continue;
    const auto ref_patch = extract_patch(ref_gray, p.x(), p.y(), half_width);
    if (!ref_patch) continue;
    const auto& a = ref_patch->intensities;
    bool sample_used = false;

    for (const MultiViewNeighbor& nb : neighbors) {
      Eigen::Matrix3d h;
      try {
        h = homography(ref_view, *nb.view, *plane);
      } catch (const DegenerateError&) {
        continue;
      }
      bool inside = true;
      std::size_t k = 0;
      for (int dy = -half_width; dy <= half_width && inside; ++dy) {
        for (int dx = -half_width; dx <= half_width; ++dx, ++k) {
          homog[k] = h * Eigen::Vector3d(p.x() + dx, p.y() + dy, 1.0);
          if (std::abs(homog[k].z()) < 1e-12) {
            inside = false;
            break;
          }
          const double u = homog[k].x() / homog[k].z();
          const double v = homog[k].y() / homog[k].z();
          if (!sample_bilinear(*nb.gray, u, v, &warped[k], &ddx[k], &ddy[k])) {
            inside = false;
            break;
          }
        }
      }
      if (!inside) continue;
      const auto score = ncc(std::span<const double>(a), std::span<const double>(warped));
      if (!score) continue;
      sum += 1.0 - *score;
      ++result.valid_pairs;
      sample_used = true;
      if (!with_gradients) continue;

      // d(1 - NCC)/d(warped intensities).
      const double n = static_cast<double>(patch_size);
      double mean_a = 0.0, mean_b = 0.0;
      for (std::size_t i = 0; i < patch_size; ++i) {
        mean_a += a[i];
        mean_b += warped[i];
      }
      mean_a /= n;
      mean_b /= n;
      double saa = 0.0, sbb = 0.0;
      for (std::size_t i = 0; i < patch_size; ++i) {
        saa += (a[i] - mean_a) * (a[i] - mean_a);
        sbb += (warped[i] - mean_b) * (warped[i] - mean_b);
      }
      const double root = std::sqrt(saa * sbb);
      Eigen::Matrix3d grad_h = Eigen::Matrix3d::Zero();
      k = 0;
      for (int dy = -half_width; dy <= half_width; ++dy) {
        for (int dx = -half_width; dx <= half_width; ++dx, ++k) {
          const double dncc = (a[k] - mean_a) / root - *score * (warped[k] - mean_b) / sbb;
          const double g = -dncc;
          const double w = homog[k].z();
          const double u = homog[k].x() / w;
          const double v = homog[k].y() / w;
          const Eigen::Vector3d q(p.x() + dx, p.y() + dy, 1.0);
          const double gu = g * ddx[k];
          const double gv = g * ddy[k];
          grad_h.row(0) += (gu / w) * q.transpose();
          grad_h.row(1) += (gv / w) * q.transpose();
          grad_h.row(2) += (-(gu * u + gv * v) / w) * q.transpose();
        }
      }
      // H = K_s (R - t n^T / d) K_r^-1 with d = -depth * n^T ray.
      Eigen::Matrix3d r;
      Eigen::Vector3d t;
      relative_pose(ref_view, *nb.view, &r, &t);
      const Eigen::Matrix3d grad_m = nb.view->intrinsics().transpose() * grad_h *
                                     ref_view.intrinsics_inverse().transpose();
      const double d = plane->distance;
      const Eigen::Vector3d& normal = plane->normal;
      const Eigen::Vector3d ray = ref_view.pixel_ray(p.x(), p.y());
      const double depth = plane->point.z();
      const double grad_d = t.dot(grad_m * normal) / (d * d);
      const Eigen::Vector3d grad_n = -(grad_m.transpose() * t) / d - grad_d * depth * ray;
      const double grad_depth = -grad_d * normal.dot(ray);
      const std::size_t idx = buffers.index(p.x(), p.y());
      result.grad_normal[idx] += grad_n;
      result.grad_depth[idx] += grad_depth;
    }
    if (sample_used) ++result.valid_samples;
  }

  if (result.valid_pairs > 0) {
    const double inv = 1.0 / result.valid_pairs;
    result.loss = sum * inv;
    if (with_gradients) {
      for (auto& g : result.grad_depth) g *= inv;
      for (auto& g : result.grad_normal) g *= inv;
    }
  }
  return result;
}

}  // namespace tragraph
