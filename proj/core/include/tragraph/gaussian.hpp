#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

namespace tragraph {

// Anisotropic 3D Gaussian. Quaternion stored as (w, x, y, z); covariance is
// R diag(exp(2 * log_scales)) R^T with R from the normalized quaternion.
struct Gaussian {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector4d rotation = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
  Eigen::Vector3d log_scales = Eigen::Vector3d::Zero();
  double opacity_logit = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();

  double opacity() const;
  Eigen::Vector3d scales() const;
  double max_scale() const;
};

struct GaussianSet {
  std::vector<Gaussian> gaussians;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }
};

double sigmoid(double x);
double logit(double p);

Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& quaternion);
Eigen::Matrix3d build_covariance(const Eigen::Vector4d& quaternion, const Eigen::Vector3d& log_scales);

// Throws ValidationError naming the first Gaussian with a non-finite field.
void validate_gaussians(const GaussianSet& set);

// Binary layout: "TGGS1", uint32 count, per Gaussian 14 float32 (position 3,
// quaternion 4, log_scales 3, opacity_logit 1, color 3), then center 3 and
// radius 1 as float32. All little-endian.
std::vector<unsigned char> encode_gaussians(const GaussianSet& set);
GaussianSet decode_gaussians(const std::vector<unsigned char>& bytes);
void save_gaussians(const GaussianSet& set, const std::filesystem::path& path);
GaussianSet load_gaussians(const std::filesystem::path& path);

}  // namespace tragraph
