#include <benchmark/benchmark.h>

#include <random>

#include "tragraph/backward.hpp"
#include "tragraph/graph.hpp"
#include "tragraph/raster.hpp"
#include "tragraph/synth.hpp"
#include "tragraph/trainer.hpp"

using namespace tragraph;

namespace {

GaussianSet random_scene(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GaussianSet set;
  for (int i = 0; i < count; ++i) {
    Gaussian g;
    const double z = 2.5 + 3.0 * u(rng);
    g.position = Eigen::Vector3d((u(rng) - 0.5) * z, (u(rng) - 0.5) * z, z);
    g.rotation = Eigen::Vector4d(u(rng) + 0.5, u(rng), u(rng), u(rng)).normalized();
    g.log_scales = Eigen::Vector3d::Constant(std::log(0.03 + 0.1 * u(rng)));
    g.opacity_logit = logit(0.2 + 0.7 * u(rng));
    g.color = Eigen::Vector3d(u(rng), u(rng), u(rng));
    set.gaussians.push_back(g);
  }
  return set;
}

CameraView square_view(int size) {
  CameraView v;
  v.fx = v.fy = 0.9 * size;
  v.cx = v.cy = 0.5 * (size - 1);
  v.width = v.height = size;
  return v;
}

void BM_Rasterize(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const GaussianSet set = random_scene(static_cast<int>(state.range(0)), rng);
  const CameraView view = square_view(96);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(set, view));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rasterize)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_LossAndGradients(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const GaussianSet set = random_scene(static_cast<int>(state.range(0)), rng);
  const CameraView view = square_view(96);
  const Image target(96, 96, 0.5);
  LossInputs in;
  in.target = &target;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_loss(set, view, RasterSettings{}, in, true));
}
BENCHMARK(BM_LossAndGradients)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_BfsSegment(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int n = static_cast<int>(state.range(0));
  ConnectivityGraph g;
  for (int i = 1; i <= n; ++i) g.add_vertex(i);
  for (int i = 2; i <= n; ++i) g.add_edge(i, 1 + static_cast<int>(rng() % (i - 1)), 1 + static_cast<double>(rng() % 50));
  for (int e = 0; e < 4 * n; ++e) {
    const int a = 1 + static_cast<int>(rng() % n), b = 1 + static_cast<int>(rng() % n);
    if (a != b) g.add_edge(a, b, 1 + static_cast<double>(rng() % 50));
  }
  for (auto _ : state) benchmark::DoNotOptimize(bfs_segment(g, 8));
}
BENCHMARK(BM_BfsSegment)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

// Coarse global training against a full-resolution region run of equal
// iteration count.
Dataset small_street() {
  SynthConfig cfg;
  cfg.num_gaussians = 150;
  cfg.num_views = 12;
  cfg.image_size = 64;
  const SyntheticScene s = generate_synthetic_scene(cfg);
  return {s.model, s.images};
}

void BM_TrainGlobalCoarse(benchmark::State& state) {
  const Dataset data = small_street();
  TrainConfig cfg;
  cfg.iterations = 400;
  cfg.densify = false;
  for (auto _ : state) benchmark::DoNotOptimize(train_global_coarse(data, cfg));
}
BENCHMARK(BM_TrainGlobalCoarse)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_TrainFullRegion(benchmark::State& state) {
  const Dataset data = small_street();
  const RegionPartition p = assign_points(bfs_segment(build_graph(data.model), 1), data.model);
  TrainConfig cfg;
  cfg.iterations = 100;
  cfg.densify = false;
  cfg.multiview = false;
  for (auto _ : state) benchmark::DoNotOptimize(train_region(data, p, 0, cfg));
}
BENCHMARK(BM_TrainFullRegion)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
