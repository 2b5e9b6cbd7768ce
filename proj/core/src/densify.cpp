#include "tragraph/densify.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "tragraph/error.hpp"

namespace tragraph {

double gamma(const Eigen::Vector3d& position, const Eigen::Vector3d& center, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("scene radius must be positive");
  const double dist = (position - center).norm();
  if (dist < 2.0 * radius) return 1.0;
  return dist / radius - 1.0;
}

DensifyStats::DensifyStats(std::size_t n) { reset(n); }

void DensifyStats::reset(std::size_t n) {
  grad_accum.assign(n, 0.0);
  view_count.assign(n, 0);
  position_grad_accum.assign(n, Eigen::Vector3d::Zero());
}

void DensifyStats::accumulate(const GradientBundle& bundle) {
  if (bundle.visible.size() != grad_accum.size()) throw ArgumentError("densify stats size mismatch");
  for (std::size_t i = 0; i < grad_accum.size(); ++i) {
    if (!bundle.visible[i]) continue;
    grad_accum[i] += bundle.mean2d_grad_norm[i];
    view_count[i] += 1;
    position_grad_accum[i] += bundle.gaussians[i].position;
  }
}

double DensifyStats::mean_grad(std::size_t i) const {
  return view_count[i] > 0 ? grad_accum[i] / view_count[i] : 0.0;
}

DensifyOutcome densify_control(const GaussianSet& set, const DensifyStats& stats, const DensifyParams& params,
                               std::mt19937_64& rng) {
  if (stats.grad_accum.size() != set.size()) throw ArgumentError("densify stats do not match the set");
  if (!(params.g > 0.0 && params.g < params.b)) throw ArgumentError("scale thresholds need 0 < g < b");

  DensifyOutcome outcome;
  outcome.set.center = set.center;
  outcome.set.radius = set.radius;
  std::vector<Gaussian> candidates;
  std::vector<int> origin;
  candidates.reserve(set.size() * 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto factor = [&](const Gaussian& g) {
    return params.multiscale ? gamma(g.position, set.center, set.radius) : 1.0;
  };

  for (std::size_t i = 0; i < set.size(); ++i) {
    const Gaussian& g = set.gaussians[i];
    if (!(stats.mean_grad(i) > params.grad_threshold)) {
      candidates.push_back(g);
      origin.push_back(static_cast<int>(i));
      continue;
    }
    const double max_scale = g.max_scale();
    if (max_scale < params.g * factor(g) * set.radius) {
      candidates.push_back(g);
      origin.push_back(static_cast<int>(i));
      Gaussian clone = g;
      const Eigen::Vector3d grad = stats.position_grad_accum[i];
      if (grad.norm() > 0.0) clone.position -= params.clone_offset * max_scale * grad.normalized();
      candidates.push_back(clone);
      origin.push_back(-1);
      ++outcome.cloned;
    } else {
      const Eigen::Matrix3d rot = rotation_matrix(g.rotation);
      const Eigen::Vector3d scales = g.scales();
      // Children are drawn uniformly inside the parent's 1-sigma ellipsoid.
      for (int child = 0; child < 2; ++child) {
        Gaussian c = g;
        Eigen::Vector3d sample;
        do {
          sample = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
        } while (sample.squaredNorm() > 1.0);
        c.position = g.position + rot * scales.cwiseProduct(sample);
        c.log_scales = g.log_scales.array() - std::log(params.split_factor);
        candidates.push_back(c);
        origin.push_back(-1);
      }
      ++outcome.split;
    }
  }

  outcome.set.gaussians.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Gaussian& g = candidates[i];
    const bool too_big = g.max_scale() > params.b * factor(g) * set.radius;
    const bool too_faint = params.prune_opacity_active && g.opacity() < params.prune_opacity;
    if (too_big || too_faint) {
      ++outcome.pruned;
      continue;
    }
    outcome.set.gaussians.push_back(g);
    outcome.origin.push_back(origin[i]);
  }
  return outcome;
}

}  // namespace tragraph
