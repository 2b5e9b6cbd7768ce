#pragma once

#include <Eigen/Core>
#include <random>
#include <string>
#include <vector>

#include "tragraph/gaussian.hpp"
#include "tragraph/multiview.hpp"
#include "tragraph/raster.hpp"

namespace tragraph {

struct GaussianGradient {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector4d rotation = Eigen::Vector4d::Zero();
  Eigen::Vector3d log_scales = Eigen::Vector3d::Zero();
  double opacity_logit = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

struct GradientBundle {
  std::vector<GaussianGradient> gaussians;
  // |d loss / d mean2d| in normalized device units (pixel gradient scaled by
  // half the image size), and whether the Gaussian was projected this view.
  std::vector<double> mean2d_grad_norm;
  std::vector<bool> visible;
};

// Gradients with respect to the final frame buffers.
struct BufferGradients {
  Image color;
  std::vector<double> depth;
  std::vector<Eigen::Vector3d> normal;

  static BufferGradients zeros(int width, int height);
};

GradientBundle rasterize_backward(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                                  const RasterPlan& plan, const FrameBuffers& buffers,
                                  const BufferGradients& grads);

struct MultiViewTerm {
  bool enabled = false;
  const GrayImage* ref_gray = nullptr;
  std::vector<MultiViewNeighbor> neighbors;
  int half_width = 3;
  // Either a fixed sample list, or `sample_count` pixels drawn with `rng`
  // after the forward pass.
  std::vector<Eigen::Vector2i> fixed_samples;
  int sample_count = 1024;
  double weight = 1.0;
  std::mt19937_64* rng = nullptr;
};

struct LossInputs {
  const Image* target = nullptr;
  double lambda = 0.2;
  MultiViewTerm multiview;
};

struct LossEvaluation {
  double total = 0.0;
  double photometric = 0.0;
  double multiview = 0.0;
  int mv_valid_pairs = 0;
  std::vector<Eigen::Vector2i> mv_samples;
  FrameBuffers buffers;
  GradientBundle gradients;  // empty unless requested
};

// Total loss (1 - lambda) L1 + lambda (1 - SSIM) + L_mv for one view.
LossEvaluation evaluate_loss(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                             const LossInputs& inputs, bool with_gradients);

// evaluate_loss with gradients; throws ValidationError naming the Gaussian
// index and parameter on a non-finite partial.
LossEvaluation compute_gradients(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                                 const LossInputs& inputs);

}  // namespace tragraph
