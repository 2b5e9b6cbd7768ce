#pragma once

#include <Eigen/Core>
#include <random>
#include <vector>

#include "tragraph/backward.hpp"
#include "tragraph/gaussian.hpp"

namespace tragraph {

// Position-aware scale factor: 1 inside twice the scene radius, |mu - c| / r - 1 beyond.
double gamma(const Eigen::Vector3d& position, const Eigen::Vector3d& center, double radius);

// Running view-space gradient statistics since the last densification step.
struct DensifyStats {
  std::vector<double> grad_accum;
  std::vector<int> view_count;
  std::vector<Eigen::Vector3d> position_grad_accum;

  explicit DensifyStats(std::size_t n = 0);
  void reset(std::size_t n);
  void accumulate(const GradientBundle& bundle);
  double mean_grad(std::size_t i) const;
};

struct DensifyParams {
  double grad_threshold = 2e-4;
  double g = 0.01;
  double b = 0.1;
  double prune_opacity = 0.005;
  bool prune_opacity_active = true;
  // When false, gamma is fixed at 1 (plain extent-relative thresholds).
  bool multiscale = true;
  double split_factor = 1.6;
  double clone_offset = 0.1;  // fraction of the max scale
};

struct DensifyOutcome {
  GaussianSet set;
  int cloned = 0;
  int split = 0;
  int pruned = 0;
  // Index in the input set for each surviving Gaussian; -1 for new children.
  std::vector<int> origin;
};

// Clone small high-gradient Gaussians (max scale < g * gamma * r), split the
// other high-gradient ones into two children with scales / split_factor, then
// prune Gaussians with max scale > b * gamma * r and, when active, opacity
// below prune_opacity.
DensifyOutcome densify_control(const GaussianSet& set, const DensifyStats& stats, const DensifyParams& params,
                               std::mt19937_64& rng);

}  // namespace tragraph
