#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "tragraph/camera.hpp"
#include "tragraph/gaussian.hpp"
#include "tragraph/image.hpp"
#include "tragraph/raster.hpp"

namespace tragraph {

struct ProgressiveConfig {
  double beta = 0.5;
  double lambda = 0.2;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();

  void validate() const;
};

struct RegionRank {
  std::vector<int> ordering;
  std::vector<double> scores;
};

// Similarity (1 - lambda) (1 - mean|a - b|) + lambda * SSIM; larger is better.
double matching_score(const Image& local_render, const Image& global_render, double lambda);

// Descending scores, ties by ascending region index.
RegionRank rank_from_scores(std::span<const double> scores);

RegionRank rank_regions(std::span<const GaussianSet> locals, const GaussianSet& global, const CameraView& view,
                        const ProgressiveConfig& config);

// Opacity-gated weights for one pixel: w_i = o_i while the opacity of the
// regions ranked before i sums to less than beta, else 0.
std::vector<double> progressive_weights(std::span<const double> ranked_opacity, double beta);

// Per-region buffers, rendered on black, in ranked order.
Image progressive_composite(std::span<const FrameBuffers> ranked, const ProgressiveConfig& config);

Image progressive_render(std::span<const GaussianSet> locals, const RegionRank& rank, const CameraView& view,
                         const ProgressiveConfig& config);

GaussianSet merge_sets(std::span<const GaussianSet> locals);

Image naive_merge_render(std::span<const GaussianSet> locals, const CameraView& view,
                         const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

}  // namespace tragraph
