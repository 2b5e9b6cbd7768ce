#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "../oracles/gradcheck.hpp"
#include "../oracles/oracles.hpp"
#include "../oracles/random_scenes.hpp"
#include "tragraph/adam.hpp"
#include "tragraph/backward.hpp"
#include "tragraph/densify.hpp"
#include "tragraph/error.hpp"
#include "tragraph/metrics.hpp"
#include "tragraph/multiview.hpp"
#include "tragraph/synth.hpp"
#include "tragraph/trainer.hpp"

using namespace tragraph;
using testing_support::kink_free_target;
using testing_support::random_set;
using testing_support::small_view;

namespace {

Image noise_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

// Smooth texture on the world plane z = depth, seen by a camera at `eye`
// looking along +z.
double texture(double x, double y) { return 0.5 + 0.2 * std::sin(3.1 * x + 0.4) * std::cos(2.3 * y) + 0.1 * std::sin(5.0 * y); }

GrayImage render_plane(const CameraView& v, double depth) {
  GrayImage g{v.width, v.height, std::vector<double>(static_cast<std::size_t>(v.width) * v.height)};
  for (int y = 0; y < v.height; ++y)
    for (int x = 0; x < v.width; ++x) {
      const Eigen::Vector3d ray_cam = v.pixel_ray(x, y);
      const Eigen::Vector3d ray = v.rotation.transpose() * ray_cam;
      const Eigen::Vector3d o = v.center();
      const double s = (depth - o.z()) / ray.z();
      const Eigen::Vector3d p = o + s * ray;
      g.values[static_cast<std::size_t>(y) * v.width + x] = texture(p.x(), p.y());
    }
  return g;
}

FrameBuffers plane_buffers(const CameraView& v, double depth) {
  FrameBuffers fb;
  fb.color = Image(v.width, v.height);
  const std::size_t n = static_cast<std::size_t>(v.width) * v.height;
  fb.accum_opacity.assign(n, 1.0);
  fb.normal.assign(n, Eigen::Vector3d(0, 0, -1));
  fb.depth.assign(n, depth);
  return fb;
}

}  // namespace

TEST_CASE("photometric loss examples") {
  Image a(16, 16, 0.25), b(16, 16, 0.5);
  CHECK(loss_photometric(a, a, 0.2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_photometric(a, b, 0.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(loss_photometric(a, Image(8, 16), 0.2), ArgumentError);
}

TEST_CASE("SSIM against a direct window sum") {
  std::mt19937_64 rng(9);
  const Image a = noise_image(14, 11, rng), b = noise_image(14, 11, rng);
  double expect = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> ca, cb;
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 14; ++x) {
        ca.push_back(a.at(x, y, c));
        cb.push_back(b.at(x, y, c));
      }
    expect += oracle::direct_ssim_channel(ca, cb, 14, 11) / 3.0;
  }
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("SSIM gradient against finite differences") {
  std::mt19937_64 rng(4);
  Image a = noise_image(12, 12, rng);
  const Image b = noise_image(12, 12, rng);
  Image grad;
  ssim(a, b, &grad);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t i = rng() % a.data().size();
    const double saved = a.data()[i];
    const double fd = oracle::central_difference(
        [&](double v) {
          a.data()[i] = v;
          return ssim(a, b);
        },
        saved, 1e-6);
    a.data()[i] = saved;
    CHECK(grad.data()[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("PSNR and SSIM examples") {
  Image a(16, 16, 0.3);
  CHECK(psnr(a, a) == 100.0);
  CHECK(psnr(a, Image(16, 16, 0.4)) == doctest::Approx(20.0));
  Image check(16, 16), inverse(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) {
        check.at(x, y, c) = (x + y) % 2;
        inverse.at(x, y, c) = 1 - (x + y) % 2;
      }
  CHECK(ssim(check, inverse) < 0.0);
  CHECK_THROWS_AS(psnr(a, Image(4, 4)), ArgumentError);
}

TEST_CASE("pixel plane") {
  CameraView v = small_view(64);
  v.fx = v.fy = 100;
  FrameBuffers fb = plane_buffers(v, 10.0);
  const int cx = static_cast<int>(v.cx);
  v.cx = v.cy = cx;
  const auto p = pixel_plane(fb, v, cx, cx);
  REQUIRE(p);
  CHECK(p->normal.isApprox(Eigen::Vector3d(0, 0, -1)));
  CHECK(p->distance == doctest::Approx(10.0));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const int x = static_cast<int>(rng() % 64), y = static_cast<int>(rng() % 64);
    fb.normal[fb.index(x, y)] = Eigen::Vector3d(0.2, -0.1, -1).normalized();
    fb.depth[fb.index(x, y)] = 3.0 + (rng() % 100) / 10.0;
    const auto q = pixel_plane(fb, v, x, y);
    REQUIRE(q);
    CHECK(std::abs(q->normal.dot(q->point) + q->distance) < 1e-9);
  }
  fb.accum_opacity[fb.index(1, 1)] = 0.5;
  CHECK_FALSE(pixel_plane(fb, v, 1, 1));
}

TEST_CASE("homography worked example and identity") {
  CameraView ref;
  ref.fx = ref.fy = 100;
  ref.cx = ref.cy = 50;
  ref.width = ref.height = 101;
  CameraView src = ref;
  PixelPlane plane;
  plane.normal = Eigen::Vector3d(0, 0, -1);
  plane.distance = 10;
  CHECK(homography(ref, src, plane).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  src.translation = Eigen::Vector3d(1, 0, 0);
  const Eigen::Matrix3d h = homography(ref, src, plane);
  const auto q = warp_pixel(h, {50, 50}, 101, 101);
  REQUIRE(q);
  CHECK(q->x() == doctest::Approx(60.0).epsilon(1e-15));
  CHECK(q->y() == doctest::Approx(50.0).epsilon(1e-15));
  plane.distance = 1e-7;
  CHECK_THROWS_AS(homography(ref, src, plane), DegenerateError);
}

TEST_CASE("homography agrees with direct projection") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    CameraView ref = small_view(64);
    CameraView src = small_view(64, 2);
    src.rotation = Eigen::AngleAxisd(0.2 * n(rng), Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized()).toRotationMatrix();
    src.translation = 0.5 * Eigen::Vector3d(n(rng), n(rng), n(rng));
    PixelPlane plane;
    plane.normal = Eigen::Vector3d(0.3 * n(rng), 0.3 * n(rng), -1).normalized();
    plane.distance = 3 + std::abs(n(rng));
    const Eigen::Matrix3d h = homography(ref, src, plane);
    for (int k = 0; k < 10; ++k) {
      const Eigen::Vector2d p(rng() % 64, rng() % 64);
      const auto q = apply_homography(h, p);
      REQUIRE(q);
      CHECK((*q - oracle::plane_transfer(ref, src, plane.normal, plane.distance, p)).norm() < 1e-6);
    }
  }
}

TEST_CASE("warp examples") {
  CHECK(*warp_pixel(Eigen::Matrix3d::Identity(), {3, 4}, 10, 10) == Eigen::Vector2d(3, 4));
  const Eigen::Matrix3d d = Eigen::Vector3d(2, 2, 1).asDiagonal();
  CHECK(*warp_pixel(d, {3, 4}, 10, 10) == Eigen::Vector2d(6, 8));
  CHECK_FALSE(warp_pixel(d, {6, 4}, 10, 10));
  Eigen::Matrix3d flat = Eigen::Matrix3d::Identity();
  flat(2, 2) = 0;
  CHECK_FALSE(apply_homography(flat, {0, 0}));
}

TEST_CASE("NCC properties") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> p(49), affine(49), neg(49);
  for (int i = 0; i < 49; ++i) {
    p[i] = u(rng);
    affine[i] = 2 * p[i] + 0.1;
    neg[i] = -p[i] + 3;
  }
  CHECK(std::abs(*ncc(p, p) - 1) < 1e-12);
  CHECK(std::abs(*ncc(p, affine) - 1) < 1e-12);
  CHECK(std::abs(*ncc(p, neg) + 1) < 1e-12);
  std::vector<double> q(49);
  for (double& v : q) v = u(rng);
  CHECK(*ncc(p, q) == doctest::Approx(oracle::correlation(p, q)).epsilon(1e-12));
  CHECK_FALSE(ncc(p, std::vector<double>(49, 0.5)));
  CHECK_THROWS_AS(ncc(p, std::vector<double>(9, 0.5)), ArgumentError);
  GrayImage img{10, 10, std::vector<double>(100, 0.2)};
  CHECK_FALSE(extract_patch(img, 0, 5, 3));
  CHECK(extract_patch(img, 3, 3, 3));
}

TEST_CASE("multi-view loss on planes") {
  const double depth = 6.0;
  CameraView ref = look_at(1, {0, 0, 0}, {0, 0, 1}, {0, -1, 0}, 60, 48, 48);
  CameraView src = look_at(2, {0.4, 0.1, 0}, {0.4, 0.1, 1}, {0, -1, 0}, 60, 48, 48);
  const GrayImage ref_gray = render_plane(ref, depth), src_gray = render_plane(src, depth);
  const FrameBuffers fb = plane_buffers(ref, depth);
  std::vector<Eigen::Vector2i> samples;
  for (int y = 6; y < 42; y += 3)
    for (int x = 6; x < 42; x += 3) samples.push_back({x, y});
  const MultiViewNeighbor nb[] = {{&src, &src_gray}};

  SUBCASE("co-located identical views") {
    const MultiViewNeighbor same[] = {{&ref, &ref_gray}};
    const MultiViewResult r = loss_mv(fb, ref, ref_gray, same, samples, 3, false);
    CHECK(r.valid_pairs == static_cast<int>(samples.size()));
    CHECK(r.loss < 1e-12);
  }
  SUBCASE("true plane is near zero and a perturbed depth is worse") {
    const MultiViewResult good = loss_mv(fb, ref, ref_gray, nb, samples, 3, false);
    CHECK(good.valid_pairs > 0);
    CHECK(good.loss < 1e-3);
    const FrameBuffers off = plane_buffers(ref, depth * 1.1);
    const MultiViewResult bad = loss_mv(off, ref, ref_gray, nb, samples, 3, false);
    CHECK(bad.loss > good.loss);
  }
  SUBCASE("textureless images skip every sample") {
    const GrayImage flat{48, 48, std::vector<double>(48 * 48, 0.4)};
    const MultiViewNeighbor flat_nb[] = {{&src, &flat}};
    const MultiViewResult r = loss_mv(fb, ref, flat, flat_nb, samples, 3, true);
    CHECK(r.loss == 0.0);
    CHECK(r.valid_pairs == 0);
    for (double g : r.grad_depth) CHECK(g == 0.0);
  }
}

TEST_CASE("gamma") {
  const Eigen::Vector3d c(1, 2, 3);
  const double r = 2.0;
  CHECK(gamma(c + Eigen::Vector3d(0.5 * r, 0, 0), c, r) == 1.0);
  CHECK(gamma(c + Eigen::Vector3d(0, 2 * r, 0), c, r) == 1.0);
  CHECK(gamma(c + Eigen::Vector3d(0, 0, 3 * r), c, r) == 2.0);
  CHECK(gamma(c + Eigen::Vector3d(0, 0, std::nextafter(2 * r, 0.0)), c, r) == 1.0);
  CHECK_THROWS_AS(gamma(c, c, 0.0), ArgumentError);
  double last = 1.0;
  for (double d = 0; d < 10; d += 0.01) {
    const double gval = gamma(c + Eigen::Vector3d(d, 0, 0), c, r);
    CHECK(gval >= last);
    CHECK(gval >= 1.0);
    last = gval;
  }
}

namespace {

GaussianSet one_gaussian(double distance, double max_scale, double opacity = 0.5) {
  GaussianSet set;
  set.radius = 1.0;
  Gaussian g;
  g.position = Eigen::Vector3d(distance, 0, 0);
  g.log_scales = Eigen::Vector3d(std::log(max_scale), std::log(max_scale * 0.5), std::log(max_scale * 0.5));
  g.opacity_logit = logit(opacity);
  set.gaussians = {g};
  return set;
}

DensifyStats stats_for(std::size_t n, double grad) {
  DensifyStats s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.grad_accum[i] = grad;
    s.view_count[i] = 1;
    s.position_grad_accum[i] = Eigen::Vector3d(1, 0, 0);
  }
  return s;
}

}  // namespace

TEST_CASE("densification rules") {
  std::mt19937_64 rng(1);
  DensifyParams p;
  SUBCASE("far oversized Gaussian is pruned") {
    const DensifyOutcome out = densify_control(one_gaussian(3.0, 0.25), stats_for(1, 0.0), p, rng);
    CHECK(out.set.empty());
    CHECK(out.pruned == 1);
  }
  SUBCASE("small high-gradient Gaussian is cloned") {
    const double gam = 1.0;
    const DensifyOutcome out = densify_control(one_gaussian(0.5, 0.005 * gam), stats_for(1, 1.0), p, rng);
    CHECK(out.set.size() == 2);
    CHECK(out.cloned == 1);
    CHECK(out.origin == std::vector<int>{0, -1});
  }
  SUBCASE("large high-gradient Gaussian is split") {
    const GaussianSet in = one_gaussian(0.5, 0.05);
    const DensifyOutcome out = densify_control(in, stats_for(1, 1.0), p, rng);
    REQUIRE(out.set.size() == 2);
    CHECK(out.split == 1);
    for (const auto& child : out.set.gaussians) {
      CHECK(child.max_scale() == doctest::Approx(0.05 / 1.6));
      const Eigen::Vector3d local = (child.position - in.gaussians[0].position).cwiseQuotient(in.gaussians[0].scales());
      CHECK(local.norm() <= 1.0);
    }
  }
  SUBCASE("low gradient leaves the set unchanged") {
    const DensifyOutcome out = densify_control(one_gaussian(0.5, 0.05), stats_for(1, 1e-6), p, rng);
    CHECK(out.set.size() == 1);
  }
  SUBCASE("transparent Gaussians are pruned only when active") {
    const GaussianSet faint = one_gaussian(0.5, 0.05, 0.001);
    CHECK(densify_control(faint, stats_for(1, 0.0), p, rng).set.empty());
    p.prune_opacity_active = false;
    CHECK(densify_control(faint, stats_for(1, 0.0), p, rng).set.size() == 1);
  }
  SUBCASE("fixed gamma prunes far Gaussians that position-aware control keeps") {
    const GaussianSet far = one_gaussian(5.0, 0.2);
    CHECK(densify_control(far, stats_for(1, 0.0), p, rng).set.size() == 1);
    p.multiscale = false;
    CHECK(densify_control(far, stats_for(1, 0.0), p, rng).set.empty());
  }
}

TEST_CASE("raising b never lowers the survivor count") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    GaussianSet set;
    set.radius = 1.0;
    for (int i = 0; i < 40; ++i) {
      Gaussian g;
      g.position = Eigen::Vector3d(6 * u(rng), 0, 0);
      g.log_scales = Eigen::Vector3d::Constant(std::log(0.5 * u(rng)));
      g.opacity_logit = logit(0.01 + 0.9 * u(rng));
      set.gaussians.push_back(g);
    }
    DensifyStats stats = stats_for(set.size(), 0.0);
    std::size_t previous = 0;
    for (double b = 0.02; b < 1.0; b += 0.07) {
      DensifyParams p;
      p.b = b;
      std::mt19937_64 r2(1);
      const std::size_t survivors = densify_control(set, stats, p, r2).set.size();
      CHECK(survivors >= previous);
      previous = survivors;
    }
  }
}

TEST_CASE("Adam first step and remap") {
  Adam adam(2);
  std::vector<double> x = {1.0, -1.0};
  const std::vector<double> g = {0.5, -2.0};
  adam.step(x, g, 0.1);
  CHECK(x[0] == doctest::Approx(0.9));
  CHECK(x[1] == doctest::Approx(-0.9));
  adam.remap({1, -1}, 1);
  CHECK(adam.size() == 2);
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(101);
  RasterSettings s;
  s.min_alpha = 0.0;
  s.min_transmittance = 0.0;
  s.background = Eigen::Vector3d(0.2, 0.1, 0.3);
  for (int trial = 0; trial < 4; ++trial) {
    const CameraView v = small_view(12);
    const GaussianSet set = random_set(rng, 5);
    const Image target = kink_free_target(rasterize(set, v, s).color, rng);
    LossInputs in;
    in.target = &target;
    in.lambda = 0.2;
    const auto errors = oracle::gradient_check(set, v, s, in);
    CHECK(errors[0].relative < 1e-3);
    CHECK(errors[1].relative < 1e-3);
    CHECK(errors[2].relative < 1e-3);
    CHECK(errors[3].relative < 1e-5);
    CHECK(errors[4].relative < 1e-5);
  }
}

TEST_CASE("multi-view gradients match finite differences") {
  std::mt19937_64 rng(7);
  RasterSettings s;
  s.min_alpha = 0.0;
  s.min_transmittance = 0.0;
  const CameraView ref = small_view(24, 1);
  CameraView src = small_view(24, 2);
  src.translation = Eigen::Vector3d(-0.3, 0.05, 0.0);
  GaussianSet set = random_set(rng, 8, 0.8, 0.95);
  for (auto& g : set.gaussians) g.log_scales += Eigen::Vector3d::Constant(std::log(2.5));
  const Image target = kink_free_target(rasterize(set, ref, s).color, rng);
  const GrayImage ref_gray = to_gray(noise_image(24, 24, rng));
  const GrayImage src_gray = to_gray(noise_image(24, 24, rng));
  LossInputs in;
  in.target = &target;
  in.multiview.enabled = true;
  in.multiview.ref_gray = &ref_gray;
  in.multiview.neighbors = {{&src, &src_gray}};
  in.multiview.half_width = 2;
  const FrameBuffers fb = rasterize(set, ref, s);
  in.multiview.fixed_samples = mv_candidates(fb, ref, 2);
  REQUIRE(in.multiview.fixed_samples.size() > 10);
  const LossEvaluation e = evaluate_loss(set, ref, s, in, true);
  CHECK(e.mv_valid_pairs > 0);
  const auto errors = oracle::gradient_check(set, ref, s, in, 1e-7);
  CHECK(errors[0].relative < 1e-3);
  CHECK(errors[1].relative < 1e-3);
  CHECK(errors[2].relative < 1e-3);
  CHECK(errors[3].relative < 1e-3);
}

TEST_CASE("zero photometric loss gives zero gradients") {
  std::mt19937_64 rng(5);
  const CameraView v = small_view(16);
  const GaussianSet set = random_set(rng, 5);
  const Image target = rasterize(set, v).color;
  LossInputs in;
  in.target = &target;
  in.lambda = 0.0;
  const LossEvaluation e = compute_gradients(set, v, RasterSettings{}, in);
  CHECK(e.total == 0.0);
  for (const auto& g : e.gradients.gaussians) {
    CHECK(g.position.norm() == 0.0);
    CHECK(g.color.norm() == 0.0);
    CHECK(g.opacity_logit == 0.0);
  }
}

TEST_CASE("non-finite gradients are reported") {
  std::mt19937_64 rng(5);
  const CameraView v = small_view(16);
  GaussianSet set = random_set(rng, 3);
  for (auto& g : set.gaussians) g.position = Eigen::Vector3d(0, 0, 3);
  Image target(16, 16, 0.5);
  target.at(8, 8, 0) = std::numeric_limits<double>::quiet_NaN();
  LossInputs in;
  in.target = &target;
  CHECK_THROWS_AS(compute_gradients(set, v, RasterSettings{}, in), ValidationError);
}

namespace {

Dataset small_dataset(int views = 8) {
  SynthConfig cfg;
  cfg.num_gaussians = 60;
  cfg.num_views = views;
  cfg.image_size = 32;
  cfg.rng_seed = 3;
  const SyntheticScene s = generate_synthetic_scene(cfg);
  return {s.model, s.images};
}

}  // namespace

TEST_CASE("training reduces loss and is deterministic") {
  const Dataset data = small_dataset();
  RegionPartition p = bfs_segment(build_graph(data.model), 1);
  p = assign_points(p, data.model);
  TrainConfig cfg;
  cfg.iterations = 120;
  cfg.densify = false;
  cfg.multiview = false;
  const TrainResult plain = train_region(data, p, 0, cfg);
  REQUIRE(plain.curve.size() == 120);
  double first = 0, last = 0;
  for (int i = 0; i < 10; ++i) {
    first += plain.curve[i].photometric;
    last += plain.curve[plain.curve.size() - 1 - i].photometric;
  }
  CHECK(last < 0.7 * first);

  cfg.densify = cfg.multiview = true;
  cfg.densify_from = 40;
  cfg.densify_until = 100;
  cfg.densify_interval = 40;
  cfg.mv_from = 60;
  cfg.mv_pixel_samples = 64;
  const TrainResult a = train_region(data, p, 0, cfg);
  const TrainResult b = train_region(data, p, 0, cfg);
  CHECK(a.curve.back().gaussian_count != 60);
  CHECK(encode_gaussians(a.set) == encode_gaussians(b.set));
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].total == b.curve[i].total);
  CHECK_THROWS_AS(train_region(data, p, 1, cfg), ArgumentError);
}

TEST_CASE("coarse global training keeps the Gaussian count") {
  const Dataset data = small_dataset();
  TrainConfig cfg;
  cfg.iterations = 40;
  const TrainResult r = train_global_coarse(data, cfg);
  CHECK(r.curve.size() == 10);
  CHECK(r.curve.front().gaussian_count == r.set.size());
  CHECK(r.set.size() <= data.model.points.size() / 4 + 1);
}

TEST_CASE("initialization from sparse points") {
  std::vector<SparsePoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({i, Eigen::Vector3d(i, 0, 0), Eigen::Vector3d(0.2, 0.4, 0.6), {}});
  const GaussianSet s = initialize_gaussians(pts, 0.1);
  REQUIRE(s.size() == 5);
  CHECK(s.gaussians[0].scales()[0] == doctest::Approx(2.0));
  CHECK(s.gaussians[2].scales()[0] == doctest::Approx(4.0 / 3.0));
  CHECK(s.gaussians[0].opacity() == doctest::Approx(0.1));
  CHECK(s.gaussians[0].rotation == Eigen::Vector4d(1, 0, 0, 0));
}

TEST_CASE("voxel downsampling and view downsampling") {
  std::vector<SparsePoint> pts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 400; ++i) pts.push_back({i, Eigen::Vector3d(u(rng), u(rng), u(rng)), {}, {}});
  const auto keep = voxel_downsample(pts, 100);
  CHECK(keep.size() <= 100);
  CHECK(keep.size() >= 25);
  CHECK(std::is_sorted(keep.begin(), keep.end()));
  CHECK(voxel_downsample(pts, 1000).size() == 400);

  CameraView v = small_view(32);
  const CameraView d = downsample_view(v, 4);
  CHECK(d.width == 8);
  CHECK(d.fx == v.fx / 4);
  CHECK(d.cx == doctest::Approx(3.5));
}

TEST_CASE("dataset split every eighth view") {
  const Dataset data = small_dataset(17);
  const DatasetSplit s = split_dataset(data, 8);
  REQUIRE(s.test.model.views.size() == 3);
  CHECK(s.test.model.views[0].id == data.model.views[0].id);
  CHECK(s.test.model.views[1].id == data.model.views[8].id);
  CHECK(s.train.model.views.size() == 14);
  for (const auto& p : s.train.model.points)
    for (int o : p.observers) CHECK(s.train.model.has_view(o));
}

TEST_CASE("train config text") {
  const TrainConfig c = parse_train_config(KeyValueText::parse("iterations = 50\ndensify = false\nmultiview = false\n"));
  CHECK(c.iterations == 50);
  CHECK_FALSE(c.multiview);
  CHECK(c.effective_mv_from() == 500);
  CHECK(TrainConfig{}.effective_mv_from() == 500);
  const TrainConfig r = parse_train_config(train_config_to_text(c));
  CHECK(r.iterations == 50);
  try {
    parse_train_config(KeyValueText::parse("densify = false\nlearning = 1\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(TrainConfig::full_scale().densify_from == 500);
  CHECK(TrainConfig::full_scale().densify_until == 15000);
  CHECK(TrainConfig{}.lambda == 0.2);
  CHECK(TrainConfig{}.g == 0.01);
  CHECK(TrainConfig{}.b == 0.1);
  CHECK(TrainConfig{}.mv_neighbors == 4);
}
