#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tragraph {

// Adam over a flat parameter block with a single learning rate.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-15);

  std::size_t size() const { return m_.size(); }

  void step(std::span<double> params, std::span<const double> grads, double learning_rate);

  // Rebuilds the moment buffers after densification: entry i takes the
  // moments of origin[i], or zeros when origin[i] < 0.
  void remap(const std::vector<int>& origin, std::size_t block);

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-15;
  long long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace tragraph
