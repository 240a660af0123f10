#include "aquarender/adam.hpp"

#include <cmath>

#include "aquarender/error.hpp"

namespace aquarender {

void Adam::step(std::span<double> params, std::span<const double> grad, const AdamSettings& s) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ContractError("Adam::step: size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = s.beta1 * m_[i] + (1.0 - s.beta1) * grad[i];
    v_[i] = s.beta2 * v_[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
  }
}

}  // namespace aquarender
