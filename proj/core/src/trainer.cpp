#include "tragraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tragraph/adam.hpp"
#include "tragraph/backward.hpp"
#include "tragraph/error.hpp"
#include "tragraph/raster.hpp"

namespace tragraph {

TrainConfig TrainConfig::full_scale() {
  TrainConfig cfg;
  cfg.iterations = 40000;
  cfg.densify_from = 500;
  cfg.densify_until = 15000;
  cfg.prune_from = 500;
  cfg.prune_until = 15000;
  return cfg;
}

int TrainConfig::effective_mv_from() const { return mv_from >= 0 ? mv_from : std::max(500, iterations / 8); }

void TrainConfig::validate() const {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
  };
  need(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  need(iterations >= 1, "iterations must be at least 1");
  need(densify_interval >= 1, "densify_interval must be at least 1");
  need(grad_threshold > 0.0, "grad_threshold must be positive");
  need(g > 0.0 && g < b, "g and b must satisfy 0 < g < b");
  if (densify)
    need(densify_from < densify_until && densify_until <= iterations,
         "densify_from < densify_until <= iterations must hold");
  need(prune_opacity >= 0.0 && prune_opacity < 1.0, "prune_opacity must lie in [0, 1)");
  need(mv_neighbors >= 0, "mv_neighbors must be >= 0");
  need(mv_patch >= 3 && mv_patch % 2 == 1, "mv_patch must be odd and >= 3");
  need(mv_pixel_samples >= 1, "mv_pixel_samples must be at least 1");
  need(mv_weight >= 0.0, "mv_weight must be >= 0");
  need(lr_position >= 0.0 && lr_color >= 0.0 && lr_opacity >= 0.0 && lr_scale >= 0.0 && lr_rotation >= 0.0,
       "learning rates must be >= 0");
  need(lr_position_final_ratio > 0.0, "lr_position_final_ratio must be positive");
  need(init_opacity > 0.0 && init_opacity < 1.0, "init_opacity must lie in (0, 1)");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainConfig parse_train_config(const KeyValueText& text) {
  TrainConfig cfg;
  std::map<std::string, double*> reals = {
      {"lambda", &cfg.lambda},           {"grad_threshold", &cfg.grad_threshold},
      {"g", &cfg.g},                     {"b", &cfg.b},
      {"prune_opacity", &cfg.prune_opacity}, {"mv_weight", &cfg.mv_weight},
      {"lr_position", &cfg.lr_position}, {"lr_position_final_ratio", &cfg.lr_position_final_ratio},
      {"lr_color", &cfg.lr_color},       {"lr_opacity", &cfg.lr_opacity},
      {"lr_scale", &cfg.lr_scale},       {"lr_rotation", &cfg.lr_rotation},
      {"init_opacity", &cfg.init_opacity}};
  std::map<std::string, int*> ints = {
      {"iterations", &cfg.iterations},   {"densify_interval", &cfg.densify_interval},
      {"densify_from", &cfg.densify_from}, {"densify_until", &cfg.densify_until},
      {"prune_from", &cfg.prune_from},   {"prune_until", &cfg.prune_until},
      {"mv_neighbors", &cfg.mv_neighbors}, {"mv_patch", &cfg.mv_patch},
      {"mv_from", &cfg.mv_from},         {"mv_pixel_samples", &cfg.mv_pixel_samples}};
  std::map<std::string, bool*> flags = {
      {"multiscale", &cfg.multiscale}, {"densify", &cfg.densify}, {"multiview", &cfg.multiview}};
  for (const auto& e : text.entries()) {
    if (auto it = reals.find(e.key); it != reals.end()) *it->second = to_double(e);
    else if (auto jt = ints.find(e.key); jt != ints.end()) *jt->second = static_cast<int>(to_int(e));
    else if (auto kt = flags.find(e.key); kt != flags.end()) *kt->second = to_bool(e);
    else if (e.key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(to_int(e));
    else throw ParseError("unknown key '" + e.key + "'", e.line);
  }
  try {
    cfg.validate();
  } catch (const ValidationError& err) {
    throw ParseError(err.what(), 0);
  }
  return cfg;
}

KeyValueText train_config_to_text(const TrainConfig& cfg) {
  KeyValueText t;
  t.set("lambda", format_double(cfg.lambda));
  t.set("iterations", std::to_string(cfg.iterations));
  t.set("densify_interval", std::to_string(cfg.densify_interval));
  t.set("densify_from", std::to_string(cfg.densify_from));
  t.set("densify_until", std::to_string(cfg.densify_until));
  t.set("grad_threshold", format_double(cfg.grad_threshold));
  t.set("g", format_double(cfg.g));
  t.set("b", format_double(cfg.b));
  t.set("prune_opacity", format_double(cfg.prune_opacity));
  t.set("prune_from", std::to_string(cfg.prune_from));
  t.set("prune_until", std::to_string(cfg.prune_until));
  t.set("multiscale", cfg.multiscale ? "true" : "false");
  t.set("densify", cfg.densify ? "true" : "false");
  t.set("multiview", cfg.multiview ? "true" : "false");
  t.set("mv_neighbors", std::to_string(cfg.mv_neighbors));
  t.set("mv_patch", std::to_string(cfg.mv_patch));
  t.set("mv_from", std::to_string(cfg.mv_from));
  t.set("mv_pixel_samples", std::to_string(cfg.mv_pixel_samples));
  t.set("mv_weight", format_double(cfg.mv_weight));
  t.set("lr_position", format_double(cfg.lr_position));
  t.set("lr_position_final_ratio", format_double(cfg.lr_position_final_ratio));
  t.set("lr_color", format_double(cfg.lr_color));
  t.set("lr_opacity", format_double(cfg.lr_opacity));
  t.set("lr_scale", format_double(cfg.lr_scale));
  t.set("lr_rotation", format_double(cfg.lr_rotation));
  t.set("init_opacity", format_double(cfg.init_opacity));
  t.set("rng_seed", std::to_string(cfg.rng_seed));
  return t;
}

const Image& Dataset::image_for(int view_id) const {
  for (std::size_t i = 0; i < model.views.size(); ++i)
    if (model.views[i].id == view_id) {
      if (i >= images.size()) throw ArgumentError("no image for view " + std::to_string(view_id));
      return images[i];
    }
  throw ArgumentError("unknown view id " + std::to_string(view_id));
}

DatasetSplit split_dataset(const Dataset& data, int every) {
  if (data.images.size() != data.model.views.size()) throw ArgumentError("dataset images and views differ in count");
  DatasetSplit split;
  std::set<int> test_ids;
  for (std::size_t i = 0; i < data.model.views.size(); ++i) {
    const bool test = every > 0 && i % static_cast<std::size_t>(every) == 0;
    Dataset& dst = test ? split.test : split.train;
    dst.model.views.push_back(data.model.views[i]);
    dst.images.push_back(data.images[i]);
    if (test) test_ids.insert(data.model.views[i].id);
  }
  split.train.model.points = data.model.points;
  for (auto& p : split.train.model.points)
    p.observers.erase(std::remove_if(p.observers.begin(), p.observers.end(), [&](int id) { return test_ids.count(id) != 0; }),
                      p.observers.end());
  for (const auto& e : data.model.match_edges)
    if (!test_ids.count(e.view_a) && !test_ids.count(e.view_b)) split.train.model.match_edges.push_back(e);
  split.test.model.points = data.model.points;
  return split;
}

void scene_frame(std::span<const CameraView> views, Eigen::Vector3d* center, double* radius) {
  if (views.empty()) throw ArgumentError("scene frame needs at least one view");
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& v : views) c += v.center();
  c /= static_cast<double>(views.size());
  double r = 0.0;
  for (const auto& v : views) r = std::max(r, (v.center() - c).norm());
  *center = c;
  *radius = r > 0.0 ? 1.1 * r : 1.0;
}

GaussianSet initialize_gaussians(std::span<const SparsePoint> points, double init_opacity) {
  GaussianSet set;
  const std::size_t n = points.size();
  set.gaussians.reserve(n);
  std::vector<double> nearest;
  for (std::size_t i = 0; i < n; ++i) {
    nearest.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) nearest.push_back((points[i].position - points[j].position).norm());
    const std::size_t m = std::min<std::size_t>(3, nearest.size());
    std::partial_sort(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(m), nearest.end());
    double scale = m == 0 ? 0.1 : std::accumulate(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(m), 0.0) / m;
    scale = std::max(scale, 1e-7);
    Gaussian g;
    g.position = points[i].position;
    g.log_scales = Eigen::Vector3d::Constant(std::log(scale));
    g.opacity_logit = logit(init_opacity);
    g.color = points[i].color;
    set.gaussians.push_back(g);
  }
  return set;
}

namespace {

constexpr std::size_t kBlocks[5] = {3, 4, 3, 1, 3};

void pack(const GaussianSet& set, std::vector<double> (&params)[5]) {
  for (auto& p : params) p.clear();
  for (const auto& g : set.gaussians) {
    params[0].insert(params[0].end(), g.position.data(), g.position.data() + 3);
    params[1].insert(params[1].end(), g.rotation.data(), g.rotation.data() + 4);
    params[2].insert(params[2].end(), g.log_scales.data(), g.log_scales.data() + 3);
    params[3].push_back(g.opacity_logit);
    params[4].insert(params[4].end(), g.color.data(), g.color.data() + 3);
  }
}

void unpack(const std::vector<double> (&params)[5], GaussianSet* set) {
  for (std::size_t i = 0; i < set->size(); ++i) {
    Gaussian& g = set->gaussians[i];
    g.position = Eigen::Map<const Eigen::Vector3d>(&params[0][3 * i]);
    g.rotation = Eigen::Map<const Eigen::Vector4d>(&params[1][4 * i]);
    g.log_scales = Eigen::Map<const Eigen::Vector3d>(&params[2][3 * i]);
    g.opacity_logit = params[3][i];
    g.color = Eigen::Map<const Eigen::Vector3d>(&params[4][3 * i]);
  }
}

void pack_gradients(const GradientBundle& bundle, std::vector<double> (&grads)[5]) {
  for (auto& p : grads) p.clear();
  for (const auto& g : bundle.gaussians) {
    grads[0].insert(grads[0].end(), g.position.data(), g.position.data() + 3);
    grads[1].insert(grads[1].end(), g.rotation.data(), g.rotation.data() + 4);
    grads[2].insert(grads[2].end(), g.log_scales.data(), g.log_scales.data() + 3);
    grads[3].push_back(g.opacity_logit);
    grads[4].insert(grads[4].end(), g.color.data(), g.color.data() + 3);
  }
}

}  // namespace

TrainResult train_views(const Dataset& data, const std::vector<int>& view_ids, const std::vector<int>& point_indices,
                        const ConnectivityGraph& graph, const TrainConfig& cfg) {
  cfg.validate();
  if (view_ids.empty()) throw ArgumentError("no training views");
  if (point_indices.empty()) throw ArgumentError("no initial points");

  std::vector<CameraView> views;
  std::vector<const Image*> targets;
  std::map<int, std::size_t> slot;
  for (int id : view_ids) {
    views.push_back(data.model.view(id));
    targets.push_back(&data.image_for(id));
    slot[id] = views.size() - 1;
  }
  std::vector<SparsePoint> points;
  for (int idx : point_indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= data.model.points.size())
      throw ArgumentError("point index " + std::to_string(idx) + " out of range");
    points.push_back(data.model.points[static_cast<std::size_t>(idx)]);
  }

  TrainResult result;
  result.set = initialize_gaussians(points, cfg.init_opacity);
  scene_frame(views, &result.set.center, &result.set.radius);
  const double radius = result.set.radius;

  // Multi-view neighbors restricted to the training views.
  std::vector<GrayImage> grays;
  std::vector<std::vector<std::size_t>> neighbor_slots(views.size());
  const bool use_mv = cfg.multiview && cfg.mv_neighbors > 0;
  if (use_mv) {
    grays.reserve(views.size());
    for (const Image* t : targets) grays.push_back(to_gray(*t));
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (!graph.has_vertex(views[i].id)) continue;
      for (int nb : top_neighbors(graph, views[i].id, std::numeric_limits<int>::max())) {
        const auto it = slot.find(nb);
        if (it == slot.end()) continue;
        neighbor_slots[i].push_back(it->second);
        if (static_cast<int>(neighbor_slots[i].size()) == cfg.mv_neighbors) break;
      }
    }
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<double> params[5], grads[5];
  Adam adam[5];
  for (int k = 0; k < 5; ++k) adam[k] = Adam(kBlocks[k] * result.set.size());
  DensifyStats stats(result.set.size());
  pack(result.set, params);

  RasterSettings settings;
  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const int mv_from = cfg.effective_mv_from();

  for (int it = 0; it < cfg.iterations; ++it) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t vi = order[cursor++];
    const CameraView& view = views[vi];

    LossInputs inputs;
    inputs.target = targets[vi];
    inputs.lambda = cfg.lambda;
    if (use_mv && it >= mv_from && !neighbor_slots[vi].empty()) {
      inputs.multiview.enabled = true;
      inputs.multiview.ref_gray = &grays[vi];
      for (std::size_t s : neighbor_slots[vi]) inputs.multiview.neighbors.push_back({&views[s], &grays[s]});
      inputs.multiview.half_width = cfg.mv_patch / 2;
      inputs.multiview.sample_count = cfg.mv_pixel_samples;
      inputs.multiview.weight = cfg.mv_weight;
      inputs.multiview.rng = &rng;
    }

    const LossEvaluation eval = compute_gradients(result.set, view, settings, inputs);
    result.curve.push_back({it, view.id, eval.total, eval.photometric, eval.multiview, result.set.size()});

    const int step = it + 1;
    const bool densify_window = cfg.densify && step <= cfg.densify_until;
    if (densify_window) stats.accumulate(eval.gradients);

    pack_gradients(eval.gradients, grads);
    const double t = cfg.iterations > 1 ? static_cast<double>(it) / (cfg.iterations - 1) : 0.0;
    const double lr[5] = {cfg.lr_position * radius * std::pow(cfg.lr_position_final_ratio, t), cfg.lr_rotation,
                          cfg.lr_scale, cfg.lr_opacity, cfg.lr_color};
    for (int k = 0; k < 5; ++k) adam[k].step(params[k], grads[k], lr[k]);
    for (double& c : params[4]) c = std::clamp(c, 0.0, 1.0);
    for (std::size_t i = 0; i < result.set.size(); ++i) {
      Eigen::Map<Eigen::Vector4d> q(&params[1][4 * i]);
      const double n = q.norm();
      if (n > 1e-12) q /= n;
      else q = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    }
    unpack(params, &result.set);

    if (densify_window && step >= cfg.densify_from && step % cfg.densify_interval == 0) {
      DensifyParams dp;
      dp.grad_threshold = cfg.grad_threshold;
      dp.g = cfg.g;
      dp.b = cfg.b;
      dp.prune_opacity = cfg.prune_opacity;
      dp.prune_opacity_active = step >= cfg.prune_from && step <= cfg.prune_until;
      dp.multiscale = cfg.multiscale;
      DensifyOutcome out = densify_control(result.set, stats, dp, rng);
      if (out.set.empty()) throw ValidationError("densification removed every Gaussian");
      result.set = std::move(out.set);
      for (int k = 0; k < 5; ++k) adam[k].remap(out.origin, kBlocks[k]);
      stats.reset(result.set.size());
      pack(result.set, params);
    }
  }
  return result;
}

TrainResult train_region(const Dataset& data, const RegionPartition& partition, int region, const TrainConfig& cfg) {
  if (region < 0 || region >= partition.k)
    throw ArgumentError("region " + std::to_string(region) + " out of range [0, " + std::to_string(partition.k) + ")");
  std::vector<int> views;
  for (int id : partition.region_cameras(region))
    if (data.model.has_view(id)) views.push_back(id);
  if (views.empty()) throw ArgumentError("region " + std::to_string(region) + " has no cameras");
  if (partition.point_regions.size() != data.model.points.size())
    throw ArgumentError("partition point assignment does not match the model");
  const std::vector<int> points = partition.region_points(region);
  if (points.empty()) throw ArgumentError("region " + std::to_string(region) + " has no points");
  return train_views(data, views, points, build_graph(data.model), cfg);
}

std::vector<int> voxel_downsample(std::span<const SparsePoint> points, std::size_t target) {
  const std::size_t n = points.size();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (target == 0) throw ArgumentError("voxel target must be positive");
  if (target >= n) return all;

  Eigen::Vector3d lo = points[0].position, hi = points[0].position;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  using Key = std::array<long long, 3>;
  const auto bucket = [&](double cell) {
    std::map<Key, std::vector<int>> voxels;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d q = ((points[i].position - lo) / cell).array().floor();
      voxels[{static_cast<long long>(q.x()), static_cast<long long>(q.y()), static_cast<long long>(q.z())}].push_back(
          static_cast<int>(i));
    }
    return voxels;
  };
  // Smallest cell size whose occupied-voxel count does not exceed the target.
  double small = 1e-9, large = std::max((hi - lo).norm(), 1e-9) * 2.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (small + large);
    if (bucket(mid).size() > target) small = mid;
    else large = mid;
  }
  std::vector<int> chosen;
  for (const auto& [key, members] : bucket(large)) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i : members) centroid += points[i].position;
    centroid /= static_cast<double>(members.size());
    int best = members.front();
    for (int i : members)
      if ((points[i].position - centroid).squaredNorm() < (points[best].position - centroid).squaredNorm()) best = i;
    chosen.push_back(best);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

CameraView downsample_view(const CameraView& view, int factor) {
  if (factor < 1) throw ArgumentError("downsample factor must be >= 1");
  CameraView out = view;
  out.fx = view.fx / factor;
  out.fy = view.fy / factor;
  // Pixel centers at integers: block j covers source pixels [j f, j f + f - 1].
  out.cx = (view.cx + 0.5) / factor - 0.5;
  out.cy = (view.cy + 0.5) / factor - 0.5;
  out.width = view.width / factor;
  out.height = view.height / factor;
  return out;
}

TrainResult train_global_coarse(const Dataset& data, const TrainConfig& cfg) {
  if (data.model.views.empty()) throw ArgumentError("no training views");
  if (data.model.points.empty()) throw ArgumentError("no initial points");
  constexpr int kFactor = 4;
  Dataset coarse;
  coarse.model.match_edges = data.model.match_edges;
  const std::vector<int> keep = voxel_downsample(data.model.points, std::max<std::size_t>(1, data.model.points.size() / 4));
  coarse.model.points = data.model.points;
  std::vector<int> ids;
  for (std::size_t i = 0; i < data.model.views.size(); ++i) {
    coarse.model.views.push_back(downsample_view(data.model.views[i], kFactor));
    coarse.images.push_back(downsample(data.images.at(i), kFactor));
    ids.push_back(data.model.views[i].id);
  }
  TrainConfig c = cfg;
  c.densify = false;
  c.multiview = false;
  c.iterations = std::max(1, cfg.iterations / 4);
  ConnectivityGraph graph;
  return train_views(coarse, ids, keep, graph, c);
}

}  // namespace tragraph
