#pragma once

#include <Eigen/Core>
#include <random>

#include "tragraph/camera.hpp"
#include "tragraph/gaussian.hpp"
#include "tragraph/image.hpp"

namespace testing_support {

// Camera at the origin looking down +z with the principal point centred.
inline tragraph::CameraView small_view(int size, int id = 1) {
  tragraph::CameraView v;
  v.id = id;
  v.fx = v.fy = 1.2 * size;
  v.cx = v.cy = 0.5 * (size - 1);
  v.width = v.height = size;
  return v;
}

// Gaussians in a frustum slab 2.5..5 units in front of `small_view`.
inline tragraph::GaussianSet random_set(std::mt19937_64& rng, int count, double min_opacity = 0.05,
                                        double max_opacity = 0.95) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  tragraph::GaussianSet set;
  set.radius = 1.0;
  for (int i = 0; i < count; ++i) {
    tragraph::Gaussian g;
    const double z = 2.5 + 2.5 * u(rng);
    g.position = Eigen::Vector3d((u(rng) - 0.5) * 0.8 * z, (u(rng) - 0.5) * 0.8 * z, z);
    Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
    g.rotation = q.normalized();
    for (int a = 0; a < 3; ++a) g.log_scales[a] = std::log(0.08 + 0.3 * u(rng));
    const double o = min_opacity + (max_opacity - min_opacity) * u(rng);
    g.opacity_logit = std::log(o / (1.0 - o));
    g.color = Eigen::Vector3d(u(rng), u(rng), u(rng));
    set.gaussians.push_back(g);
  }
  return set;
}

// Target that differs from `render` by 0.05..0.3 in every sample, so central
// differences never straddle the L1 kink at zero residual.
inline tragraph::Image kink_free_target(const tragraph::Image& render, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.3);
  tragraph::Image out = render;
  for (double& v : out.data()) {
    const double off = u(rng);
    v = v + off <= 1.0 ? v + off : v - off;
  }
  return out;
}

}  // namespace testing_support
