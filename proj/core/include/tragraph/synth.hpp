#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tragraph/gaussian.hpp"
#include "tragraph/image.hpp"
#include "tragraph/keyvalue.hpp"
#include "tragraph/sparse_model.hpp"

namespace tragraph {

enum class TrajectoryKind { kOrbit, kStreet, kGrid };

std::string to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory_kind(const std::string& text);

enum class SceneLayout {
  kVolume,  // Gaussians fill a box in front of the trajectory
  kPlane,   // flat textured wall of disc-shaped Gaussians
};

struct SynthConfig {
  int num_gaussians = 300;
  TrajectoryKind trajectory_kind = TrajectoryKind::kStreet;
  int num_views = 24;
  int image_size = 96;
  std::uint64_t rng_seed = 1;
  double far_cluster_fraction = 0.0;
  SceneLayout layout = SceneLayout::kVolume;
  // Std-dev of the position noise on sparse points, relative to the near radius.
  double point_noise = 0.02;
  // Every Nth view is held out for evaluation; 0 disables the split.
  int test_every = 8;

  void validate() const;
};

// Reads `key = value` text; unknown keys raise ParseError naming key and line.
SynthConfig parse_synth_config(const KeyValueText& text);
KeyValueText synth_config_to_text(const SynthConfig& config);

struct SyntheticScene {
  GaussianSet truth;
  SparseModel model;
  std::vector<Image> images;  // one per model view, same order
  double near_radius = 0.0;
  Eigen::Vector3d near_center = Eigen::Vector3d::Zero();
  std::vector<bool> is_far;   // per truth Gaussian
};

SyntheticScene generate_synthetic_scene(const SynthConfig& config);

}  // namespace tragraph
