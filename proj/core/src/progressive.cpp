#include "tragraph/progressive.hpp"

#include <algorithm>
#include <numeric>

#include "tragraph/error.hpp"
#include "tragraph/metrics.hpp"

namespace tragraph {

void ProgressiveConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
}

double matching_score(const Image& local_render, const Image& global_render, double lambda) {
  if (local_render.width() != global_render.width() || local_render.height() != global_render.height())
    throw ArgumentError("matching_score: image dimensions differ");
  return (1.0 - lambda) * (1.0 - l1_distance(local_render, global_render)) + lambda * ssim(local_render, global_render);
}

RegionRank rank_from_scores(std::span<const double> scores) {
  RegionRank rank;
  rank.scores.assign(scores.begin(), scores.end());
  rank.ordering.resize(scores.size());
  std::iota(rank.ordering.begin(), rank.ordering.end(), 0);
  std::stable_sort(rank.ordering.begin(), rank.ordering.end(),
                   [&](int a, int b) { return rank.scores[a] > rank.scores[b]; });
  return rank;
}

RegionRank rank_regions(std::span<const GaussianSet> locals, const GaussianSet& global, const CameraView& view,
                        const ProgressiveConfig& config) {
  config.validate();
  if (locals.empty()) throw ArgumentError("rank_regions needs at least one local set");
  RasterSettings settings;
  settings.background = config.background;
  const Image reference = rasterize(global, view, settings).color;
  std::vector<double> scores;
  for (const auto& local : locals)
    scores.push_back(matching_score(rasterize(local, view, settings).color, reference, config.lambda));
  return rank_from_scores(scores);
}

std::vector<double> progressive_weights(std::span<const double> ranked_opacity, double beta) {
  std::vector<double> weights;
  weights.reserve(ranked_opacity.size());
  double before = 0.0;
  for (double o : ranked_opacity) {
    weights.push_back(before < beta ? o : 0.0);
    before += o;
  }
  return weights;
}

Image progressive_composite(std::span<const FrameBuffers> ranked, const ProgressiveConfig& config) {
  config.validate();
  if (ranked.empty()) throw ArgumentError("progressive_composite needs at least one region");
  const int w = ranked.front().width(), h = ranked.front().height();
  for (const auto& b : ranked)
    if (b.width() != w || b.height() != h) throw ArgumentError("region buffers differ in size");

  Image out(w, h);
  std::vector<double> opacity(ranked.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = ranked.front().index(x, y);
      for (std::size_t i = 0; i < ranked.size(); ++i) opacity[i] = ranked[i].accum_opacity[p];
      const std::vector<double> weights = progressive_weights(opacity, config.beta);
      double total = 0.0;
      Eigen::Vector3d blend = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        total += weights[i];
        // Black-background color divided by coverage gives the region's surface color.
        for (int c = 0; c < 3; ++c) blend[c] += weights[i] * ranked[i].color.at(x, y, c) / opacity[i];
      }
      if (total <= kAccumEpsilon) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = config.background[c];
        continue;
      }
      const double coverage = std::min(1.0, total);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = coverage * (blend[c] / total) + (1.0 - coverage) * config.background[c];
    }
  }
  return out;
}

Image progressive_render(std::span<const GaussianSet> locals, const RegionRank& rank, const CameraView& view,
                         const ProgressiveConfig& config) {
  if (rank.ordering.size() != locals.size()) throw ArgumentError("rank does not match the local sets");
  std::vector<FrameBuffers> buffers;
  buffers.reserve(locals.size());
  const RasterSettings black;
  for (int i : rank.ordering) {
    if (i < 0 || static_cast<std::size_t>(i) >= locals.size()) throw ArgumentError("rank index out of range");
    buffers.push_back(rasterize(locals[i], view, black));
  }
  return progressive_composite(buffers, config);
}

GaussianSet merge_sets(std::span<const GaussianSet> locals) {
  if (locals.empty()) throw ArgumentError("merge_sets needs at least one set");
  GaussianSet merged;
  merged.center = locals.front().center;
  merged.radius = locals.front().radius;
  for (const auto& s : locals) merged.gaussians.insert(merged.gaussians.end(), s.gaussians.begin(), s.gaussians.end());
  return merged;
}

Image naive_merge_render(std::span<const GaussianSet> locals, const CameraView& view,
                         const Eigen::Vector3d& background) {
  RasterSettings settings;
  settings.background = background;
  return rasterize(merge_sets(locals), view, settings).color;
}

}  // namespace tragraph
