#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tragraph/densify.hpp"
#include "tragraph/gaussian.hpp"
#include "tragraph/graph.hpp"
#include "tragraph/image.hpp"
#include "tragraph/keyvalue.hpp"
#include "tragraph/sparse_model.hpp"

namespace tragraph {

struct TrainConfig {
  double lambda = 0.2;
  int iterations = 2000;
  int densify_interval = 100;
  int densify_from = 100;
  int densify_until = 500;
  double grad_threshold = 2e-4;
  double g = 0.01;
  double b = 0.1;
  double prune_opacity = 0.005;
  int prune_from = 100;
  int prune_until = 500;
  bool multiscale = true;
  bool densify = true;
  bool multiview = true;
  int mv_neighbors = 4;
  int mv_patch = 7;
  int mv_from = -1;  // < 0 selects max(500, iterations / 8)
  int mv_pixel_samples = 1024;
  double mv_weight = 1.0;
  double lr_position = 1.6e-4;  // scaled by the scene radius
  double lr_position_final_ratio = 0.01;
  double lr_color = 2.5e-3;
  double lr_opacity = 5e-2;
  double lr_scale = 5e-3;
  double lr_rotation = 1e-3;
  double init_opacity = 0.1;
  std::uint64_t rng_seed = 7;

  // Training schedule and thresholds reported for the full-scale runs.
  static TrainConfig full_scale();

  int effective_mv_from() const;
  void validate() const;
};

TrainConfig parse_train_config(const KeyValueText& text);
KeyValueText train_config_to_text(const TrainConfig& config);

// Views and their target images, aligned by index.
struct Dataset {
  SparseModel model;
  std::vector<Image> images;

  const Image& image_for(int view_id) const;
};

// Splits off every `every`-th view (positions 0, every, 2*every, ...) as the
// test set. The training model keeps all points, with test observers removed.
struct DatasetSplit {
  Dataset train;
  Dataset test;
};
DatasetSplit split_dataset(const Dataset& dataset, int every);

struct LossRecord {
  int iteration = 0;
  int view_id = 0;
  double total = 0.0;
  double photometric = 0.0;
  double multiview = 0.0;
  std::size_t gaussian_count = 0;
};

struct TrainResult {
  GaussianSet set;
  std::vector<LossRecord> curve;
};

// Center = mean camera position; radius = 1.1 * max distance to the center
// (1 when all cameras coincide).
void scene_frame(std::span<const CameraView> views, Eigen::Vector3d* center, double* radius);

// Gaussians at the given points: isotropic scale = mean distance to the 3
// nearest other points, opacity `init_opacity`, identity rotation.
GaussianSet initialize_gaussians(std::span<const SparsePoint> points, double init_opacity);

// Trains the Gaussians of one region against that region's cameras.
TrainResult train_region(const Dataset& data, const RegionPartition& partition, int region, const TrainConfig& config);

// Trains on an explicit list of views and initial points; the building block
// of train_region and train_global_coarse.
TrainResult train_views(const Dataset& data, const std::vector<int>& view_ids, const std::vector<int>& point_indices,
                        const ConnectivityGraph& graph, const TrainConfig& config);

// Coarse scene-wide set: voxel-downsampled points (about a quarter), images
// and intrinsics downsampled 4x, no densification or multi-view term,
// iterations / 4.
TrainResult train_global_coarse(const Dataset& data, const TrainConfig& config);

// Voxel grid downsampling to roughly `target` points (one per occupied voxel,
// the point nearest the voxel centroid).
std::vector<int> voxel_downsample(std::span<const SparsePoint> points, std::size_t target);

CameraView downsample_view(const CameraView& view, int factor);

}  // namespace tragraph
