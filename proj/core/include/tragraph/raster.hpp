#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tragraph/camera.hpp"
#include "tragraph/gaussian.hpp"
#include "tragraph/image.hpp"

namespace tragraph {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kLowPassDilation = 0.3;
inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kAccumEpsilon = 1e-4;

struct RasterSettings {
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
  // Contributions below this are skipped. 0 keeps every term.
  double min_alpha = 1.0 / 255.0;
  // Compositing stops once transmittance falls below this. 0 never stops.
  double min_transmittance = 1e-4;
};

struct Projected2D {
  Eigen::Vector2d mean2d;
  Eigen::Matrix2d cov2d;    // includes the low-pass dilation
  Eigen::Vector3d conic;    // inverse cov2d as (a, b, c): [[a, b], [b, c]]
  Eigen::Vector3d camera_point;
  double depth = 0.0;
  int source = 0;
};

std::optional<Projected2D> project_gaussian(const Gaussian& g, const CameraView& view);

// Camera-frame unit normal: the rotation column of the smallest scale (lowest
// index on ties), flipped to face the camera.
Eigen::Vector3d gaussian_normal(const Gaussian& g, const CameraView& view);

struct FrameBuffers {
  Image color;
  std::vector<double> depth;           // alpha-weighted, divided by accum_opacity
  std::vector<Eigen::Vector3d> normal; // alpha-weighted, unit length
  std::vector<double> accum_opacity;

  int width() const { return color.width(); }
  int height() const { return color.height(); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * color.width() + x; }
};

// One projected, sorted and binned Gaussian list for a view; reused by the
// forward pass and the backward pass.
struct RasterPlan {
  std::vector<Projected2D> splats;          // sorted front to back
  std::vector<Eigen::Vector3d> normals;     // per splat, camera frame
  std::vector<double> normal_signs;         // +1 or -1 applied to the rotation column
  std::vector<int> normal_axis;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> tile_lists; // splat indices per tile, front to back
};

inline constexpr int kTileSize = 16;

// Exponent below which opacity * exp(power) is certainly under min_alpha; the
// margin keeps borderline terms on the exact comparison path.
inline double skip_power(double opacity, double min_alpha) {
  if (min_alpha <= 0.0 || opacity <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(min_alpha / opacity) - 1e-9;
}

RasterPlan plan_raster(const GaussianSet& set, const CameraView& view, const RasterSettings& settings);

// Composites a prepared plan. `rasterize` is plan_raster followed by this.
FrameBuffers render_plan(const GaussianSet& set, const RasterPlan& plan, const CameraView& view,
                         const RasterSettings& settings);

FrameBuffers rasterize(const GaussianSet& set, const CameraView& view,
                       const RasterSettings& settings = {});

// Depth, then position (lexicographic), then input index.
bool splat_before(const Projected2D& a, const Projected2D& b, const GaussianSet& set);

}  // namespace tragraph
