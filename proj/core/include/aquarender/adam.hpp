#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aquarender {

struct AdamSettings {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment gradient descent with bias correction. Holds one pair of
// moment accumulators per parameter.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t size) : m_(size, 0.0), v_(size, 0.0) {}

  // params -= lr * mhat / (sqrt(vhat) + eps)
  void step(std::span<double> params, std::span<const double> grad, const AdamSettings& s);

  std::size_t size() const noexcept { return m_.size(); }
  long steps() const noexcept { return t_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace aquarender
