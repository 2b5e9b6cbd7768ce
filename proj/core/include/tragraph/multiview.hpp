#pragma once

#include <Eigen/Core>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tragraph/camera.hpp"
#include "tragraph/image.hpp"
#include "tragraph/raster.hpp"

namespace tragraph {

// Plane n^T X + distance = 0 in the reference camera frame, n facing the camera.
struct PixelPlane {
  Eigen::Vector3d normal = Eigen::Vector3d(0.0, 0.0, -1.0);
  double distance = 1.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // back-projected pixel
};

inline constexpr double kPlaneOpacityGate = 0.5;

// Empty when the pixel's accumulated opacity is at or below the gate or the
// plane passes within the near plane of the camera.
std::optional<PixelPlane> pixel_plane(const FrameBuffers& buffers, const CameraView& view, int x, int y,
                                      double opacity_gate = kPlaneOpacityGate);

// Relative pose with X_src = R * X_ref + t.
void relative_pose(const CameraView& ref, const CameraView& src, Eigen::Matrix3d* rotation,
                   Eigen::Vector3d* translation);

// K_src (R - t n^T / d) K_ref^-1. Throws DegenerateError when |d| < 1e-6.
Eigen::Matrix3d homography(const CameraView& ref, const CameraView& src, const PixelPlane& plane);

// Homogeneous mapping; empty when |w| < 1e-12.
std::optional<Eigen::Vector2d> apply_homography(const Eigen::Matrix3d& h, const Eigen::Vector2d& p);

// As apply_homography, also empty when p' lands outside [0, width-1] x [0, height-1].
std::optional<Eigen::Vector2d> warp_pixel(const Eigen::Matrix3d& h, const Eigen::Vector2d& p, int width,
                                          int height);

struct Patch {
  Eigen::Vector2i center = Eigen::Vector2i::Zero();
  int half_width = 0;
  std::vector<double> intensities;  // row-major, (2h+1)^2
};

inline constexpr double kNccVarianceFloor = 1e-8;

// Empty when the patch would touch or cross the image border.
std::optional<Patch> extract_patch(const GrayImage& image, int x, int y, int half_width);

// Zero-mean unit-variance correlation; empty when either patch's variance is
// below the floor. Throws ArgumentError on size mismatch.
std::optional<double> ncc(const Patch& a, const Patch& b);
std::optional<double> ncc(std::span<const double> a, std::span<const double> b);

struct MultiViewNeighbor {
  const CameraView* view = nullptr;
  const GrayImage* gray = nullptr;
};

struct MultiViewResult {
  double loss = 0.0;
  int valid_pairs = 0;
  int valid_samples = 0;
  // d loss / d final buffers; empty unless gradients were requested.
  std::vector<double> grad_depth;
  std::vector<Eigen::Vector3d> grad_normal;
};

// Pixels whose plane is reliable and whose patch lies inside the image,
// row-major.
std::vector<Eigen::Vector2i> mv_candidates(const FrameBuffers& buffers, const CameraView& view, int half_width,
                                           double opacity_gate = kPlaneOpacityGate);

// Uniform subset of the candidates without replacement; all of them when
// fewer than `count`.
std::vector<Eigen::Vector2i> sample_mv_pixels(const FrameBuffers& buffers, const CameraView& view, int half_width,
                                              int count, std::mt19937_64& rng);

// Mean of (1 - NCC) over valid (sample, neighbor) pairs. The reference patch
// is read from `ref_gray` at integer pixels; each neighbor patch is bilinearly
// sampled at the homography-warped positions of the same pixels, using the
// plane of the centre pixel.
MultiViewResult loss_mv(const FrameBuffers& buffers, const CameraView& ref_view, const GrayImage& ref_gray,
                        std::span<const MultiViewNeighbor> neighbors, std::span<const Eigen::Vector2i> samples,
                        int half_width, bool with_gradients);

}  // namespace tragraph
