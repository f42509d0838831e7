#pragma once

#include <cmath>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/mlp.hpp"

namespace hjb {

/// Adam moment accumulators, shape-congruent with the parameters.
struct OptState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
  long step = 0;

  static OptState zero_like(const MlpParams& net) {
    OptState s;
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      s.m_w.push_back(Matrix::Zero(net.weights[k].rows(), net.weights[k].cols()));
      s.v_w.push_back(Matrix::Zero(net.weights[k].rows(), net.weights[k].cols()));
      s.m_b.push_back(Vector::Zero(net.biases[k].size()));
      s.v_b.push_back(Vector::Zero(net.biases[k].size()));
    }
    return s;
  }
};

/// One bias-corrected Adam step. Throws DivergenceError on a non-finite
/// gradient; never mutates state on that path.
inline void adam_update(OptState& state, MlpParams& params, const ParamGrad& grad,
                        double lr, double beta1, double beta2, double eps) {
  if (!grad.all_finite()) throw DivergenceError("non-finite gradient in adam_update");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    state.m_w[k] = beta1 * state.m_w[k] + (1.0 - beta1) * grad.weights[k];
    state.v_w[k] = beta2 * state.v_w[k] + (1.0 - beta2) * grad.weights[k].cwiseProduct(grad.weights[k]);
    params.weights[k].array() -=
        lr * (state.m_w[k].array() / bc1) / ((state.v_w[k].array() / bc2).sqrt() + eps);
    state.m_b[k] = beta1 * state.m_b[k] + (1.0 - beta1) * grad.biases[k];
    state.v_b[k] = beta2 * state.v_b[k] + (1.0 - beta2) * grad.biases[k].cwiseProduct(grad.biases[k]);
    params.biases[k].array() -=
        lr * (state.m_b[k].array() / bc1) / ((state.v_b[k].array() / bc2).sqrt() + eps);
  }
}

}  // namespace hjb
