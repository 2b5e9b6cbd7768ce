#include "tragraph/backward.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "tragraph/error.hpp"
#include "tragraph/metrics.hpp"

namespace tragraph {

BufferGradients BufferGradients::zeros(int width, int height) {
  BufferGradients g;
  g.color = Image(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  g.depth.assign(n, 0.0);
  g.normal.assign(n, Eigen::Vector3d::Zero());
  return g;
}

namespace {

// Per-splat partials with respect to the 2D quantities of one view.
struct SplatGrad {
  Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
  Eigen::Vector3d conic = Eigen::Vector3d::Zero();
  double opacity = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double depth = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

// Feature layout carried through compositing: color (3), depth, normal (3), 1.
using Feature = Eigen::Matrix<double, 8, 1>;

struct Contribution {
  int splat = 0;
  double gauss = 0.0;
  double alpha = 0.0;
  double transmittance = 0.0;
  bool clamped = false;
};

// dR/dq for a unit quaternion (w, x, y, z).
std::array<Eigen::Matrix3d, 4> rotation_partials(const Eigen::Vector4d& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  std::array<Eigen::Matrix3d, 4> d;
  d[0] << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  d[1] << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  d[2] << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  d[3] << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;
  return d;
}

}  // namespace

GradientBundle rasterize_backward(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                                  const RasterPlan& plan, const FrameBuffers& buffers,
                                  const BufferGradients& grads) {
  const std::size_t num_splats = plan.splats.size();
  std::vector<SplatGrad> sg(num_splats);
  std::vector<double> opacity(num_splats);
  std::vector<Feature> features(num_splats);
  std::vector<double> cutoff(num_splats);
  for (std::size_t s = 0; s < num_splats; ++s) {
    const Gaussian& g = set.gaussians[plan.splats[s].source];
    opacity[s] = g.opacity();
    cutoff[s] = skip_power(opacity[s], settings.min_alpha);
    features[s] << g.color, plan.splats[s].depth, plan.normals[s], 1.0;
  }

  std::vector<Contribution> contribs;
  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      const auto& list = plan.tile_lists[static_cast<std::size_t>(y / kTileSize) * plan.tiles_x + x / kTileSize];
      contribs.clear();
      double transmittance = 1.0;
      Feature accum = Feature::Zero();
      for (int s : list) {
        const Projected2D& p = plan.splats[s];
        const double dx = x - p.mean2d.x();
        const double dy = y - p.mean2d.y();
        const double power = -0.5 * (p.conic[0] * dx * dx + 2.0 * p.conic[1] * dx * dy + p.conic[2] * dy * dy);
        if (power < cutoff[s]) continue;
        const double gauss = std::exp(power);
        const double raw = opacity[s] * gauss;
        const double alpha = std::min(kMaxAlpha, raw);
        if (alpha < settings.min_alpha) continue;
        contribs.push_back({s, gauss, alpha, transmittance, raw > kMaxAlpha});
        accum += alpha * transmittance * features[s];
        transmittance *= 1.0 - alpha;
        if (transmittance < settings.min_transmittance) break;
      }
      if (contribs.empty()) continue;

      // Gradients with respect to the raw accumulators.
      const std::size_t i = buffers.index(x, y);
      Feature g_feat = Feature::Zero();
      for (int c = 0; c < 3; ++c) g_feat[c] = grads.color.at(x, y, c);
      const double g_final_t = g_feat.head<3>().dot(settings.background);
      const double acc = accum[7];
      if (acc > kAccumEpsilon) {
        const double gd = grads.depth.empty() ? 0.0 : grads.depth[i];
        g_feat[3] = gd / acc;
        g_feat[7] = -gd * (accum[3] / acc) / acc;
        if (!grads.normal.empty()) {
          const Eigen::Vector3d raw_n = accum.segment<3>(4);
          const double len = raw_n.norm();
          if (len > 1e-12) {
            const Eigen::Vector3d n = raw_n / len;
            const Eigen::Vector3d& gn = grads.normal[i];
            g_feat.segment<3>(4) = (gn - n * n.dot(gn)) / len;
          }
        }
      }
      if (g_feat.isZero(0.0) && g_final_t == 0.0) continue;

      Feature suffix = Feature::Zero();
      for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
        const int s = it->splat;
        const double weight = it->alpha * it->transmittance;
        SplatGrad& out = sg[s];
        out.color += weight * g_feat.head<3>();
        out.depth += weight * g_feat[3];
        out.normal += weight * g_feat.segment<3>(4);

        const double g_alpha = it->transmittance * g_feat.dot(features[s]) -
                               (g_feat.dot(suffix) + g_final_t * transmittance) / (1.0 - it->alpha);
        suffix += weight * features[s];
        if (it->clamped) continue;

        out.opacity += g_alpha * it->gauss;
        const double g_power = g_alpha * opacity[s] * it->gauss;
        const Projected2D& p = plan.splats[s];
        const double dx = x - p.mean2d.x();
        const double dy = y - p.mean2d.y();
        out.conic[0] += -0.5 * g_power * dx * dx;
        out.conic[1] += -g_power * dx * dy;
        out.conic[2] += -0.5 * g_power * dy * dy;
        out.mean2d.x() += g_power * (p.conic[0] * dx + p.conic[1] * dy);
        out.mean2d.y() += g_power * (p.conic[1] * dx + p.conic[2] * dy);
      }
    }
  }

  GradientBundle bundle;
  bundle.gaussians.assign(set.size(), GaussianGradient{});
  bundle.mean2d_grad_norm.assign(set.size(), 0.0);
  bundle.visible.assign(set.size(), false);

  const Eigen::Matrix3d& world_to_cam = view.rotation;
  for (std::size_t s = 0; s < num_splats; ++s) {
    const Projected2D& p = plan.splats[s];
    const Gaussian& g = set.gaussians[p.source];
    GaussianGradient& out = bundle.gaussians[p.source];
    const SplatGrad& in = sg[s];
    bundle.visible[p.source] = true;
    bundle.mean2d_grad_norm[p.source] =
        Eigen::Vector2d(in.mean2d.x() * 0.5 * view.width, in.mean2d.y() * 0.5 * view.height).norm();

    out.color = in.color;
    const double alpha = opacity[s];
    out.opacity_logit = in.opacity * alpha * (1.0 - alpha);

    // conic = cov2d^-1  =>  dL/dcov2d = -Q G Q.
    Eigen::Matrix2d q;
    q << p.conic[0], p.conic[1], p.conic[1], p.conic[2];
    Eigen::Matrix2d g_q;
    g_q << in.conic[0], 0.5 * in.conic[1], 0.5 * in.conic[1], in.conic[2];
    const Eigen::Matrix2d g_cov2d = -q * g_q * q;

    const Eigen::Vector3d cam = p.camera_point;
    const double z = cam.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << view.fx / z, 0.0, -view.fx * cam.x() / (z * z), 0.0, view.fy / z, -view.fy * cam.y() / (z * z);
    const Eigen::Matrix<double, 2, 3> t = jac * world_to_cam;
    const Eigen::Vector4d qn = g.rotation / g.rotation.norm();
    const Eigen::Matrix3d rot = rotation_matrix(g.rotation);
    const Eigen::Vector3d s2 = (2.0 * g.log_scales).array().exp();
    const Eigen::Matrix3d sigma = rot * s2.asDiagonal() * rot.transpose();

    const Eigen::Matrix3d g_sigma = t.transpose() * g_cov2d * t;
    const Eigen::Matrix<double, 2, 3> g_t = 2.0 * g_cov2d * t * sigma;
    const Eigen::Matrix<double, 2, 3> g_jac = g_t * world_to_cam.transpose();

    Eigen::Vector3d g_cam = Eigen::Vector3d::Zero();
    const double z2 = z * z, z3 = z2 * z;
    g_cam.x() += g_jac(0, 2) * (-view.fx / z2);
    g_cam.y() += g_jac(1, 2) * (-view.fy / z2);
    g_cam.z() += g_jac(0, 0) * (-view.fx / z2) + g_jac(0, 2) * (2.0 * view.fx * cam.x() / z3) +
                 g_jac(1, 1) * (-view.fy / z2) + g_jac(1, 2) * (2.0 * view.fy * cam.y() / z3);
    g_cam.x() += in.mean2d.x() * view.fx / z;
    g_cam.y() += in.mean2d.y() * view.fy / z;
    g_cam.z() += -in.mean2d.x() * view.fx * cam.x() / z2 - in.mean2d.y() * view.fy * cam.y() / z2;
    g_cam.z() += in.depth;
    out.position = world_to_cam.transpose() * g_cam;

    // Sigma = R S^2 R^T.
    Eigen::Matrix3d g_rot = 2.0 * g_sigma * rot * s2.asDiagonal();
    const Eigen::Matrix3d rt_g_r = rot.transpose() * g_sigma * rot;
    for (int k = 0; k < 3; ++k) out.log_scales[k] = 2.0 * s2[k] * rt_g_r(k, k);
    g_rot.col(plan.normal_axis[s]) += plan.normal_signs[s] * world_to_cam.transpose() * in.normal;

    const auto partials = rotation_partials(qn);
    Eigen::Vector4d g_qn;
    for (int k = 0; k < 4; ++k) g_qn[k] = (g_rot.array() * partials[k].array()).sum();
    out.rotation = (g_qn - qn * qn.dot(g_qn)) / g.rotation.norm();
  }
  return bundle;
}

LossEvaluation evaluate_loss(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                             const LossInputs& inputs, bool with_gradients) {
  if (!inputs.target) throw ArgumentError("evaluate_loss: missing target image");
  LossEvaluation eval;
  const RasterPlan plan = plan_raster(set, view, settings);
  eval.buffers = render_plan(set, plan, view, settings);

  BufferGradients grads;
  Image grad_color;
  eval.photometric = loss_photometric(eval.buffers.color, *inputs.target, inputs.lambda,
                                      with_gradients ? &grad_color : nullptr);
  eval.total = eval.photometric;

  const MultiViewTerm& mv = inputs.multiview;
  MultiViewResult mv_result;
  if (mv.enabled && mv.ref_gray && !mv.neighbors.empty()) {
    if (!mv.fixed_samples.empty()) {
      eval.mv_samples = mv.fixed_samples;
    } else if (mv.rng) {
      eval.mv_samples = sample_mv_pixels(eval.buffers, view, mv.half_width, mv.sample_count, *mv.rng);
    } else {
      eval.mv_samples = mv_candidates(eval.buffers, view, mv.half_width);
    }
    mv_result = loss_mv(eval.buffers, view, *mv.ref_gray, mv.neighbors, eval.mv_samples, mv.half_width,
                        with_gradients);
    eval.multiview = mv.weight * mv_result.loss;
    eval.mv_valid_pairs = mv_result.valid_pairs;
    eval.total += eval.multiview;
  }
  if (!with_gradients) return eval;

  grads.color = std::move(grad_color);
  if (!mv_result.grad_depth.empty()) {
    grads.depth = std::move(mv_result.grad_depth);
    grads.normal = std::move(mv_result.grad_normal);
    for (auto& g : grads.depth) g *= mv.weight;
    for (auto& g : grads.normal) g *= mv.weight;
  }
  eval.gradients = rasterize_backward(set, view, settings, plan, eval.buffers, grads);
  return eval;
}

LossEvaluation compute_gradients(const GaussianSet& set, const CameraView& view, const RasterSettings& settings,
                                 const LossInputs& inputs) {
  LossEvaluation eval = evaluate_loss(set, view, settings, inputs, true);
  for (std::size_t i = 0; i < eval.gradients.gaussians.size(); ++i) {
    const auto& g = eval.gradients.gaussians[i];
    const auto fail = [i](const char* name) {
      throw ValidationError("non-finite gradient for gaussian " + std::to_string(i) + " parameter " + name);
    };
    if (!g.position.allFinite()) fail("position");
    if (!g.rotation.allFinite()) fail("rotation");
    if (!g.log_scales.allFinite()) fail("log_scales");
    if (!std::isfinite(g.opacity_logit)) fail("opacity_logit");
    if (!g.color.allFinite()) fail("color");
  }
  return eval;
}

}  // namespace tragraph
