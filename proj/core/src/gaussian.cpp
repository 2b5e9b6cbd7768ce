#include "tragraph/gaussian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "tragraph/error.hpp"

namespace tragraph {

double Gaussian::opacity() const { return sigmoid(opacity_logit); }

Eigen::Vector3d Gaussian::scales() const { return log_scales.array().exp(); }

double Gaussian::max_scale() const { return std::exp(log_scales.maxCoeff()); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("logit argument must lie in (0, 1)");
  return std::log(p / (1.0 - p));
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& quaternion) {
  const Eigen::Vector4d q = quaternion / quaternion.norm();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Matrix3d build_covariance(const Eigen::Vector4d& quaternion, const Eigen::Vector3d& log_scales) {
  const Eigen::Matrix3d r = rotation_matrix(quaternion);
  const Eigen::Vector3d s2 = (2.0 * log_scales).array().exp();
  return r * s2.asDiagonal() * r.transpose();
}

void validate_gaussians(const GaussianSet& set) {
  for (std::size_t i = 0; i < set.gaussians.size(); ++i) {
    const auto& g = set.gaussians[i];
    const auto fail = [i](const char* field) {
      throw ValidationError("gaussian " + std::to_string(i) + ": non-finite " + field);
    };
    if (!g.position.allFinite()) fail("position");
    if (!g.rotation.allFinite() || g.rotation.norm() < 1e-12) fail("rotation");
    if (!g.log_scales.allFinite() || !g.scales().allFinite()) fail("log_scales");
    if (!std::isfinite(g.opacity_logit)) fail("opacity_logit");
    if (!g.color.allFinite()) fail("color");
  }
}

namespace {

constexpr char kMagic[] = {'T', 'G', 'G', 'S', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::vector<unsigned char>& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    if (pos_ + 4 > bytes_.size()) throw FormatError("TGGS1: truncated data");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_gaussians(const GaussianSet& set) {
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(5 + 4 + set.size() * 56 + 16);
  put_u32(out, static_cast<std::uint32_t>(set.size()));
  for (const auto& g : set.gaussians) {
    for (int i = 0; i < 3; ++i) put_f32(out, g.position[i]);
    for (int i = 0; i < 4; ++i) put_f32(out, g.rotation[i]);
    for (int i = 0; i < 3; ++i) put_f32(out, g.log_scales[i]);
    put_f32(out, g.opacity_logit);
    for (int i = 0; i < 3; ++i) put_f32(out, g.color[i]);
  }
  for (int i = 0; i < 3; ++i) put_f32(out, set.center[i]);
  put_f32(out, set.radius);
  return out;
}

GaussianSet decode_gaussians(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 5 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw FormatError("TGGS1: bad magic");
  Reader in(bytes);
  in.skip(5);
  const std::uint32_t count = in.u32();
  if (in.remaining() != static_cast<std::size_t>(count) * 56 + 16)
    throw FormatError("TGGS1: size does not match count " + std::to_string(count));
  GaussianSet set;
  set.gaussians.resize(count);
  for (auto& g : set.gaussians) {
    for (int i = 0; i < 3; ++i) g.position[i] = in.f32();
    for (int i = 0; i < 4; ++i) g.rotation[i] = in.f32();
    for (int i = 0; i < 3; ++i) g.log_scales[i] = in.f32();
    g.opacity_logit = in.f32();
    for (int i = 0; i < 3; ++i) g.color[i] = in.f32();
  }
  for (int i = 0; i < 3; ++i) set.center[i] = in.f32();
  set.radius = in.f32();
  return set;
}

void save_gaussians(const GaussianSet& set, const std::filesystem::path& path) {
  const auto bytes = encode_gaussians(set);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GaussianSet load_gaussians(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_gaussians(bytes);
}

}  // namespace tragraph
