#include "tragraph/adam.hpp"

#include <cmath>

#include "tragraph/error.hpp"

namespace tragraph {

Adam::Adam(std::size_t size, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double learning_rate) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw ArgumentError("adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon_);
  }
}

void Adam::remap(const std::vector<int>& origin, std::size_t block) {
  std::vector<double> m(origin.size() * block, 0.0), v(origin.size() * block, 0.0);
  for (std::size_t i = 0; i < origin.size(); ++i) {
    if (origin[i] < 0) continue;
    for (std::size_t k = 0; k < block; ++k) {
      m[i * block + k] = m_[static_cast<std::size_t>(origin[i]) * block + k];
      v[i * block + k] = v_[static_cast<std::size_t>(origin[i]) * block + k];
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace tragraph
