#pragma once

// Test-side oracles: a plain scalar MLP forward pass plus finite-difference
// derivative estimates built only on it. These stay independent of the jet
// propagation they are used to check.

#include <cmath>
#include <functional>

#include "hjb/jet.hpp"
#include "hjb/mlp.hpp"

namespace testutil {

inline double mlp_value(const hjb::MlpParams& net, const hjb::Vector& x, double t) {
  hjb::Vector v(net.input_dim());
  v.head(x.size()) = x;
  v(x.size()) = t;
  for (int k = 0; k < net.layer_count(); ++k) {
    hjb::Vector z = net.weights[k] * v + net.biases[k];
    if (k + 1 < net.layer_count()) {
      for (int i = 0; i < z.size(); ++i) z(i) = std::tanh(z(i));
    }
    v = std::move(z);
  }
  return v(0);
}

struct FdJet {
  double value;
  double time_partial;
  double laplacian;
  hjb::Vector spatial_grad;
};

inline FdJet fd_jet(const hjb::MlpParams& net, const hjb::Vector& x, double t,
                    double h = 1e-4) {
  FdJet out;
  const int n = static_cast<int>(x.size());
  out.value = mlp_value(net, x, t);
  out.time_partial = (mlp_value(net, x, t + h) - mlp_value(net, x, t - h)) / (2.0 * h);
  out.spatial_grad.resize(n);
  out.laplacian = 0.0;
  hjb::Vector xp = x;
  for (int i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    const double up = mlp_value(net, xp, t);
    xp(i) = x(i) - h;
    const double um = mlp_value(net, xp, t);
    xp(i) = x(i);
    out.spatial_grad(i) = (up - um) / (2.0 * h);
    out.laplacian += (up - 2.0 * out.value + um) / (h * h);
  }
  return out;
}

inline double rel_err(double estimate, double reference) {
  return std::abs(estimate - reference) / std::max(std::abs(reference), 1.0);
}

/// Central finite differences of an arbitrary scalar function of the
/// parameters, taken over every weight and bias.
inline hjb::ParamGrad fd_param_grad(const hjb::MlpParams& net,
                                    const std::function<double(const hjb::MlpParams&)>& f,
                                    double h = 1e-4) {
  hjb::ParamGrad grad = hjb::ParamGrad::zero_like(net);
  hjb::MlpParams probe = net;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (int i = 0; i < net.weights[k].rows(); ++i) {
      for (int j = 0; j < net.weights[k].cols(); ++j) {
        probe.weights[k](i, j) = net.weights[k](i, j) + h;
        const double fp = f(probe);
        probe.weights[k](i, j) = net.weights[k](i, j) - h;
        const double fm = f(probe);
        probe.weights[k](i, j) = net.weights[k](i, j);
        grad.weights[k](i, j) = (fp - fm) / (2.0 * h);
      }
    }
    for (int i = 0; i < net.biases[k].size(); ++i) {
      probe.biases[k](i) = net.biases[k](i) + h;
      const double fp = f(probe);
      probe.biases[k](i) = net.biases[k](i) - h;
      const double fm = f(probe);
      probe.biases[k](i) = net.biases[k](i);
      grad.biases[k](i) = (fp - fm) / (2.0 * h);
    }
  }
  return grad;
}

/// Max relative error between two gradients, measured entrywise against
/// max(|reference|, 1).
inline double max_grad_rel_err(const hjb::ParamGrad& estimate, const hjb::ParamGrad& reference) {
  double worst = 0.0;
  for (std::size_t k = 0; k < estimate.weights.size(); ++k) {
    for (int i = 0; i < estimate.weights[k].rows(); ++i) {
      for (int j = 0; j < estimate.weights[k].cols(); ++j) {
        worst = std::max(worst, rel_err(estimate.weights[k](i, j), reference.weights[k](i, j)));
      }
    }
    for (int i = 0; i < estimate.biases[k].size(); ++i) {
      worst = std::max(worst, rel_err(estimate.biases[k](i), reference.biases[k](i)));
    }
  }
  return worst;
}

}  // namespace testutil
