#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedrec/matrix.hpp"

namespace fedrec {

// Adam optimizer state for one parameter tensor. Owned by exactly one
// parameter; mutated only through adam_step.
struct AdamState {
  Vec first_moment;
  Vec second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n, double lr = 0.001)
      : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

// Standard Adam update with bias correction. Deterministic: identical inputs
// yield bit-identical outputs.
inline void adam_step(std::span<double> param, std::span<const double> grad,
                      AdamState& state) {
  if (param.size() != grad.size() || param.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state size mismatch");
  if (!all_finite(grad))
    throw std::runtime_error("adam_step: non-finite gradient entry");

  state.step_count += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    param[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace fedrec
