#include "tragraph/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "tragraph/error.hpp"
#include "tragraph/raster.hpp"

namespace tragraph {

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kOrbit: return "orbit";
    case TrajectoryKind::kStreet: return "street";
    case TrajectoryKind::kGrid: return "grid";
  }
  return "street";
}

TrajectoryKind parse_trajectory_kind(const std::string& text) {
  if (text == "orbit") return TrajectoryKind::kOrbit;
  if (text == "street") return TrajectoryKind::kStreet;
  if (text == "grid") return TrajectoryKind::kGrid;
  throw ArgumentError("unknown trajectory kind '" + text + "' (expected orbit, street or grid)");
}

void SynthConfig::validate() const {
  if (num_gaussians < 1) throw ValidationError("num_gaussians must be at least 1");
  if (num_views < 2) throw ValidationError("num_views must be at least 2");
  if (image_size < 16) throw ValidationError("image_size must be at least 16");
  if (!(far_cluster_fraction >= 0.0 && far_cluster_fraction <= 1.0))
    throw ValidationError("far_cluster_fraction must lie in [0, 1]");
  if (!(point_noise >= 0.0) || !std::isfinite(point_noise)) throw ValidationError("point_noise must be >= 0");
  if (test_every < 0) throw ValidationError("test_every must be >= 0");
}

SynthConfig parse_synth_config(const KeyValueText& text) {
  SynthConfig cfg;
  for (const auto& e : text.entries()) {
    try {
      if (e.key == "num_gaussians") cfg.num_gaussians = static_cast<int>(to_int(e));
      else if (e.key == "trajectory_kind") cfg.trajectory_kind = parse_trajectory_kind(e.value);
      else if (e.key == "num_views") cfg.num_views = static_cast<int>(to_int(e));
      else if (e.key == "image_size") cfg.image_size = static_cast<int>(to_int(e));
      else if (e.key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(to_int(e));
      else if (e.key == "far_cluster_fraction") cfg.far_cluster_fraction = to_double(e);
      else if (e.key == "layout") {
        if (e.value == "volume") cfg.layout = SceneLayout::kVolume;
        else if (e.value == "plane") cfg.layout = SceneLayout::kPlane;
        else throw ArgumentError("expected volume or plane");
      } else if (e.key == "point_noise") cfg.point_noise = to_double(e);
      else if (e.key == "test_every") cfg.test_every = static_cast<int>(to_int(e));
      else throw ParseError("unknown key '" + e.key + "'", e.line);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& err) {
      throw ParseError("key '" + e.key + "': " + err.what(), e.line);
    }
  }
  try {
    cfg.validate();
  } catch (const ValidationError& err) {
    throw ParseError(err.what(), 0);
  }
  return cfg;
}

KeyValueText synth_config_to_text(const SynthConfig& cfg) {
  KeyValueText text;
  char buf[64];
  text.set("num_gaussians", std::to_string(cfg.num_gaussians));
  text.set("trajectory_kind", to_string(cfg.trajectory_kind));
  text.set("num_views", std::to_string(cfg.num_views));
  text.set("image_size", std::to_string(cfg.image_size));
  text.set("rng_seed", std::to_string(cfg.rng_seed));
  std::snprintf(buf, sizeof(buf), "%.17g", cfg.far_cluster_fraction);
  text.set("far_cluster_fraction", buf);
  text.set("layout", cfg.layout == SceneLayout::kPlane ? "plane" : "volume");
  std::snprintf(buf, sizeof(buf), "%.17g", cfg.point_noise);
  text.set("point_noise", buf);
  text.set("test_every", std::to_string(cfg.test_every));
  return text;
}

namespace {

struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  Eigen::Vector3d center() const { return 0.5 * (lo + hi); }
  double radius() const { return 0.5 * (hi - lo).norm(); }
};

// World +y points down so that camera +y matches it.
const Eigen::Vector3d kUp(0.0, -1.0, 0.0);

Box near_box(const SynthConfig& cfg) {
  switch (cfg.trajectory_kind) {
    case TrajectoryKind::kStreet: return {{-3.5, -1.0, 0.0}, {3.5, 1.0, 1.5}};
    case TrajectoryKind::kOrbit: return {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
    case TrajectoryKind::kGrid: return {{-3.0, 0.0, -3.0}, {3.0, 0.5, 3.0}};
  }
  return {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
}

std::vector<CameraView> place_cameras(const SynthConfig& cfg, const Box& box, std::mt19937_64& rng, double jitter) {
  const int n = cfg.num_views;
  const int size = cfg.image_size;
  const double focal = 0.9 * size;
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto jittered = [&](Eigen::Vector3d p) {
    if (jitter > 0.0) p += jitter * Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    return p;
  };
  std::vector<CameraView> views;
  views.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    Eigen::Vector3d eye, target, up = kUp;
    switch (cfg.trajectory_kind) {
      case TrajectoryKind::kStreet: {
        const double x = -3.0 + 6.0 * s;
        eye = jittered({x, 0.0, -3.0});
        target = eye + Eigen::Vector3d(0.0, 0.0, 1.0);
        break;
      }
      case TrajectoryKind::kOrbit: {
        const double a = 2.0 * M_PI * i / n;
        eye = jittered({3.5 * std::sin(a), -0.5, -3.5 * std::cos(a)});
        target = box.center();
        break;
      }
      case TrajectoryKind::kGrid: {
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const int rows = (n + cols - 1) / cols;
        const int r = i / cols, c = i % cols;
        const double x = cols == 1 ? 0.0 : -2.5 + 5.0 * c / (cols - 1);
        const double z = rows == 1 ? 0.0 : -2.5 + 5.0 * r / (rows - 1);
        eye = jittered({x, -3.0, z});
        target = eye + Eigen::Vector3d(0.0, 1.0, 0.0);
        up = Eigen::Vector3d(0.0, 0.0, -1.0);
        break;
      }
    }
    CameraView v = look_at(i + 1, eye, target, up, focal, size, size);
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03d.ppm", i + 1);
    v.image_ref = name;
    views.push_back(v);
  }
  return views;
}

Eigen::Vector4d random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  if (q[0] < 0.0) q = -q;
  return q;
}

Eigen::Vector3d random_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  return {u(rng), u(rng), u(rng)};
}

// Quaternion (w, x, y, z) rotating local +z onto `normal`.
Eigen::Vector4d align_z(const Eigen::Vector3d& normal) {
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), normal);
  Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
  if (out[0] < 0.0) out = -out;
  return out;
}

void add_near_gaussians(const SynthConfig& cfg, const Box& box, int count, std::mt19937_64& rng, GaussianSet* set) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d extent = box.hi - box.lo;
  if (cfg.layout == SceneLayout::kPlane) {
    // Jittered grid on a slightly tilted plane through the box center, facing -z.
    const Eigen::Vector3d normal = Eigen::AngleAxisd(0.2, Eigen::Vector3d::UnitY()) * Eigen::Vector3d(0, 0, -1);
    const Eigen::Vector3d e1 = kUp.cross(normal).normalized();
    const Eigen::Vector3d e2 = normal.cross(e1).normalized();
    const double w = std::max(extent.x(), extent.z()), h = extent.y();
    const int cols = std::max(1, static_cast<int>(std::round(std::sqrt(count * w / h))));
    const int rows = (count + cols - 1) / cols;
    const double cell = std::max(w / cols, h / rows);
    for (int i = 0; i < count; ++i) {
      const int r = i / cols, c = i % cols;
      const double a = -0.5 * w + (c + 0.25 + 0.5 * unit(rng)) * w / cols;
      const double b = -0.5 * h + (r + 0.25 + 0.5 * unit(rng)) * h / rows;
      Gaussian g;
      g.position = box.center() + a * e1 + b * e2;
      g.rotation = align_z(normal);
      const double s = cell * (0.45 + 0.25 * unit(rng));
      g.log_scales = Eigen::Vector3d(std::log(s), std::log(s * (0.7 + 0.3 * unit(rng))), std::log(0.02 * cell));
      g.opacity_logit = logit(0.9 + 0.08 * unit(rng));
      g.color = random_color(rng);
      set->gaussians.push_back(g);
    }
    return;
  }
  const double spacing = std::cbrt(extent.prod() / count);
  for (int i = 0; i < count; ++i) {
    Gaussian g;
    g.position = box.lo + extent.cwiseProduct(Eigen::Vector3d(unit(rng), unit(rng), unit(rng)));
    g.rotation = random_quaternion(rng);
    for (int a = 0; a < 3; ++a) g.log_scales[a] = std::log(spacing * (0.2 + 0.35 * unit(rng)));
    g.opacity_logit = logit(0.6 + 0.35 * unit(rng));
    g.color = random_color(rng);
    set->gaussians.push_back(g);
  }
}

void add_far_gaussians(const Box& box, const std::vector<CameraView>& views, int count, std::mt19937_64& rng,
                       GaussianSet* set) {
  if (count <= 0) return;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  for (const auto& v : views) dir += v.forward();
  if (dir.norm() < 1e-6) dir = views.front().forward();
  dir.normalize();
  const double radius = box.radius();
  const Eigen::Vector3d anchor = box.center() + 10.0 * radius * dir;
  // A backdrop slab perpendicular to the mean viewing direction.
  const Eigen::Vector3d e1 = (std::abs(dir.dot(kUp)) < 0.9 ? kUp : Eigen::Vector3d::UnitZ()).cross(dir).normalized();
  const Eigen::Vector3d e2 = dir.cross(e1).normalized();
  const double half_w = 4.0 * radius, half_h = 1.6 * radius;
  const double spacing = std::sqrt(4.0 * half_w * half_h / count);
  for (int i = 0; i < count; ++i) {
    Gaussian g;
    g.position = anchor + (2.0 * unit(rng) - 1.0) * half_w * e1 + (2.0 * unit(rng) - 1.0) * half_h * e2 +
                 (2.0 * unit(rng) - 1.0) * 0.1 * radius * dir;
    g.rotation = random_quaternion(rng);
    for (int a = 0; a < 3; ++a) g.log_scales[a] = std::log(spacing * (0.3 + 0.3 * unit(rng)));
    g.opacity_logit = logit(0.7 + 0.25 * unit(rng));
    g.color = random_color(rng);
    set->gaussians.push_back(g);
  }
}

bool camera_inside_gaussian(const CameraView& view, const GaussianSet& set) {
  const Eigen::Vector3d eye = view.center();
  for (const auto& g : set.gaussians) {
    const Eigen::Matrix3d r = rotation_matrix(g.rotation);
    const Eigen::Vector3d local = r.transpose() * (eye - g.position);
    const Eigen::Vector3d s = g.scales();
    if (local.cwiseQuotient(s).squaredNorm() < 1.0) return true;
  }
  return false;
}

void set_frame(const std::vector<CameraView>& views, GaussianSet* set) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& v : views) c += v.center();
  c /= static_cast<double>(views.size());
  double r = 0.0;
  for (const auto& v : views) r = std::max(r, (v.center() - c).norm());
  set->center = c;
  set->radius = r > 0.0 ? 1.1 * r : 1.0;
}

}  // namespace

SyntheticScene generate_synthetic_scene(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  const Box box = near_box(cfg);
  const int far_count = static_cast<int>(std::lround(cfg.far_cluster_fraction * cfg.num_gaussians));
  const int near_count = cfg.num_gaussians - far_count;

  SyntheticScene scene;
  scene.near_center = box.center();
  scene.near_radius = box.radius();

  std::vector<CameraView> views = place_cameras(cfg, box, rng, 0.0);
  add_near_gaussians(cfg, box, near_count, rng, &scene.truth);
  add_far_gaussians(box, views, far_count, rng, &scene.truth);
  scene.is_far.assign(scene.truth.size(), false);
  for (std::size_t i = static_cast<std::size_t>(near_count); i < scene.truth.size(); ++i) scene.is_far[i] = true;

  const auto degenerate = [&] {
    return std::any_of(views.begin(), views.end(), [&](const CameraView& v) { return camera_inside_gaussian(v, scene.truth); });
  };
  int attempts = 0;
  while (degenerate()) {
    if (++attempts > 100) throw DegenerateError("camera inside a Gaussian after 100 jittered placements");
    views = place_cameras(cfg, box, rng, 0.05 * scene.near_radius);
  }
  set_frame(views, &scene.truth);

  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = cfg.point_noise * scene.near_radius;
  for (std::size_t i = 0; i < scene.truth.size(); ++i) {
    const Gaussian& g = scene.truth.gaussians[i];
    SparsePoint p;
    p.id = static_cast<long long>(i) + 1;
    p.position = g.position + sigma * Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    p.color = g.color;
    for (const auto& v : views) {
      const Eigen::Vector3d cam = v.to_camera(p.position);
      if (cam.z() <= kNearPlane) continue;
      const Eigen::Vector2d px = v.project_camera(cam);
      if (px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= v.width - 1 && px.y() <= v.height - 1) p.observers.push_back(v.id);
    }
    scene.model.points.push_back(std::move(p));
  }
  scene.model.views = views;
  scene.model.match_edges = derive_covisibility_edges(scene.model);

  RasterSettings settings;
  for (const auto& v : views) scene.images.push_back(rasterize(scene.truth, v, settings).color);
  return scene;
}

}  // namespace tragraph
