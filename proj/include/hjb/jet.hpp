#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/mlp.hpp"

namespace hjb {

/// Value and spacetime derivatives of the network at one point: everything a
/// second-order parabolic residual consumes.
struct PdeJet {
  double value = 0.0;
  double time_partial = 0.0;
  double laplacian = 0.0;
  Vector spatial_grad;
};

/// Partial derivatives of a scalar point-wise loss with respect to each jet
/// component; the chain-rule seed for the parameter-gradient pass.
struct ResidualPartials {
  double d_value = 0.0;
  double d_time_partial = 0.0;
  double d_laplacian = 0.0;
  Vector d_spatial_grad;
};

struct PointSample {
  Vector x;
  double t = 0.0;
};

struct TanhActivation {
  static double f(double z) { return std::tanh(z); }
  // Derivatives expressed through s = tanh(z):
  //   sigma'   = 1 - s^2
  //   sigma''  = -2 s (1 - s^2)
  //   sigma''' = (1 - s^2)(6 s^2 - 2)
  static double d1_from(double s) { return 1.0 - s * s; }
  static double d2_from(double s, double d1) { return -2.0 * s * d1; }
  static double d3_from(double s, double d1) { return d1 * (6.0 * s * s - 2.0); }
};

// The engine propagates, per network layer, a state matrix S of shape
// (width x P*(n+3)): for each of P points a block of n+3 columns holding
//   col 0        the layer value v
//   cols 1..n    d v / d x_i
//   col n+1      d v / d t
//   col n+2      the accumulated spatial Laplacian of v
// A linear layer maps every column by W (plus bias on col 0); an elementwise
// activation maps block rows via the chain rule, where the Laplacian picks up
// sigma''(v) * |spatial jacobian row|^2.

/// Per-thread scratch. Layer state buffers persist across calls so the hot
/// probe loop never reallocates.
struct JetWorkspace {
  std::vector<Matrix> states;  // [0] input state, [k+1] output of layer k
  std::vector<Matrix> pre;     // pre-activation copies kept for the reverse pass
  Eigen::ArrayXd act_buf;      // gathered activation inputs
  Matrix adj, adj_z, adj_below;
};

namespace detail {

inline void seed_input_state(const Matrix& inputs, int n, Matrix& state) {
  const int points = static_cast<int>(inputs.rows());
  const int block = n + 3;
  state.resize(n + 1, static_cast<Eigen::Index>(points) * block);
  state.setZero();
  for (int p = 0; p < points; ++p) {
    const int off = p * block;
    for (int r = 0; r <= n; ++r) {
      state(r, off) = inputs(p, r);    // value row: x_1..x_n, t
      state(r, off + 1 + r) = 1.0;     // jacobian = identity
    }
  }
}

/// In-place elementwise activation over every point block. The tanh path
/// batches the transcendental through Eigen's vectorized exp.
template <class Act>
void activation_forward(Matrix& state, int n, Eigen::ArrayXd& act_buf) {
  const int width = static_cast<int>(state.rows());
  const int block = n + 3;
  const int points = static_cast<int>(state.cols()) / block;
  constexpr bool kTanh = std::is_same_v<Act, TanhActivation>;
  if constexpr (kTanh) {
    act_buf.resize(static_cast<Eigen::Index>(width) * points);
    for (int i = 0; i < width; ++i) {
      const double* row = state.data() + static_cast<std::ptrdiff_t>(i) * state.cols();
      for (int p = 0; p < points; ++p) act_buf(i * points + p) = row[p * block];
    }
    // tanh(z) = 1 - 2 / (exp(2z) + 1); exact at 0 and saturates correctly
    act_buf = 1.0 - 2.0 / ((2.0 * act_buf).exp() + 1.0);
  }
  for (int i = 0; i < width; ++i) {
    double* row = state.data() + static_cast<std::ptrdiff_t>(i) * state.cols();
    for (int p = 0; p < points; ++p) {
      const int off = p * block;
      double s;
      if constexpr (kTanh) {
        s = act_buf(i * points + p);
      } else {
        s = Act::f(row[off]);
      }
      const double d1 = Act::d1_from(s);
      const double d2 = Act::d2_from(s, d1);
      double q = 0.0;
      for (int c = 1; c <= n; ++c) q += row[off + c] * row[off + c];
      row[off] = s;
      for (int c = 1; c <= n + 1; ++c) row[off + c] *= d1;
      row[off + n + 2] = d1 * row[off + n + 2] + d2 * q;
    }
  }
}

inline void add_bias(const Vector& bias, int n, Matrix& state) {
  const int block = n + 3;
  const int points = static_cast<int>(state.cols()) / block;
  for (int i = 0; i < static_cast<int>(state.rows()); ++i) {
    double* row = state.data() + static_cast<std::ptrdiff_t>(i) * state.cols();
    for (int p = 0; p < points; ++p) row[p * block] += bias(i);
  }
}

/// Shared forward sweep. With keep_pre the pre-activation states are copied
/// aside for the reverse pass. Returns the output state (1 x P*(n+3)).
template <class Act>
const Matrix& forward_states(const MlpParams& net, const Matrix& inputs,
                             JetWorkspace& ws, bool keep_pre) {
  const int n = net.spatial_dim();
  if (inputs.cols() != net.input_dim()) {
    throw ConfigError("forward_jet: input layout does not match network input dim");
  }
  const int layers = net.layer_count();
  ws.states.resize(layers + 1);
  if (keep_pre) ws.pre.resize(layers);
  seed_input_state(inputs, n, ws.states[0]);
  for (int k = 0; k < layers; ++k) {
    Matrix& out = ws.states[k + 1];
    out.resize(net.weights[k].rows(), ws.states[k].cols());
    out.noalias() = net.weights[k] * ws.states[k];
    add_bias(net.biases[k], n, out);
    if (k + 1 < layers) {
      if (keep_pre) ws.pre[k] = out;
      activation_forward<Act>(out, n, ws.act_buf);
    }
  }
  return ws.states.back();
}

inline void extract_jet(const Matrix& out_state, int n, int point, PdeJet& jet) {
  const int off = point * (n + 3);
  jet.value = out_state(0, off);
  jet.spatial_grad.resize(n);
  for (int c = 0; c < n; ++c) jet.spatial_grad(c) = out_state(0, off + 1 + c);
  jet.time_partial = out_state(0, off + n + 1);
  jet.laplacian = out_state(0, off + n + 2);
}

}  // namespace detail

/// Evaluates jets for a batch of points, written as rows
/// [value, d/dx_1..d/dx_n, d/dt, laplacian]. `inputs` holds one point per row,
/// laid out (x_1..x_n, t). Allocation-free once the workspace is warm; this is
/// the attack's probe path.
template <class Act = TanhActivation>
void forward_jet_batch_rows(const MlpParams& net, const Matrix& inputs, Matrix& jet_rows,
                            JetWorkspace& ws) {
  const Matrix& out = detail::forward_states<Act>(net, inputs, ws, false);
  const int n = net.spatial_dim();
  const int block = n + 3;
  const int points = static_cast<int>(inputs.rows());
  jet_rows.resize(points, block);
  for (int p = 0; p < points; ++p) {
    for (int c = 0; c < block; ++c) jet_rows(p, c) = out(0, p * block + c);
  }
}

/// Batch evaluation into PdeJet structs.
template <class Act = TanhActivation>
void forward_jet_batch(const MlpParams& net, const Matrix& inputs,
                       std::vector<PdeJet>& jets, JetWorkspace& ws) {
  const Matrix& out = detail::forward_states<Act>(net, inputs, ws, false);
  const int n = net.spatial_dim();
  jets.resize(inputs.rows());
  for (int p = 0; p < inputs.rows(); ++p) detail::extract_jet(out, n, p, jets[p]);
}

template <class Act = TanhActivation>
PdeJet forward_jet_as(const MlpParams& net, const Vector& x, double t) {
  if (x.size() + 1 != net.input_dim()) {
    throw ConfigError("forward_jet: x length + 1 must equal network input dim");
  }
  Matrix inputs(1, net.input_dim());
  inputs.row(0).head(x.size()) = x.transpose();
  inputs(0, x.size()) = t;
  JetWorkspace ws;
  std::vector<PdeJet> jets;
  forward_jet_batch<Act>(net, inputs, jets, ws);
  return std::move(jets[0]);
}

/// Exact jet of the network at (x, t).
inline PdeJet forward_jet(const MlpParams& net, const Vector& x, double t) {
  return forward_jet_as<TanhActivation>(net, x, t);
}

// --- parameter gradients ------------------------------------------------------

/// Per-point output of the loss callback handed to loss_param_grad.
struct PointLoss {
  double loss = 0.0;
  ResidualPartials partials;
};

namespace detail {

/// Reverse sweep: seeds the adjoint state from the loss partials and
/// accumulates exact parameter gradients. All products mirror the forward
/// relations; the activation adjoint needs sigma''' because the forward
/// Laplacian update already consumed sigma''.
template <class Act>
void reverse_accumulate(const MlpParams& net, JetWorkspace& ws,
                        const ResidualPartials& partials, ParamGrad& grad) {
  const int n = net.spatial_dim();
  const int block = n + 3;
  const int layers = net.layer_count();
  Matrix& adj = ws.adj;
  adj.resize(1, block);
  adj(0, 0) = partials.d_value;
  for (int c = 0; c < n; ++c) adj(0, 1 + c) = partials.d_spatial_grad(c);
  adj(0, n + 1) = partials.d_time_partial;
  adj(0, n + 2) = partials.d_laplacian;

  for (int k = layers - 1; k >= 0; --k) {
    Matrix& adj_z = ws.adj_z;
    if (k == layers - 1) {
      adj_z = adj;
    } else {
      // activation backward at the stored pre-activation state
      const Matrix& z = ws.pre[k];
      const Matrix& a = ws.states[k + 1];  // a(i,0) == sigma(z(i,0))
      adj_z.resize(adj.rows(), adj.cols());
      for (int i = 0; i < static_cast<int>(z.rows()); ++i) {
        const double s = a(i, 0);
        const double d1 = Act::d1_from(s);
        const double d2 = Act::d2_from(s, d1);
        const double d3 = Act::d3_from(s, d1);
        double q = 0.0;
        for (int c = 1; c <= n; ++c) q += z(i, c) * z(i, c);
        double dot_j = 0.0;
        for (int c = 1; c <= n + 1; ++c) dot_j += adj(i, c) * z(i, c);
        const double abar_l = adj(i, n + 2);
        adj_z(i, 0) = adj(i, 0) * d1 + dot_j * d2 + abar_l * (d2 * z(i, n + 2) + d3 * q);
        for (int c = 1; c <= n; ++c) {
          adj_z(i, c) = adj(i, c) * d1 + abar_l * d2 * 2.0 * z(i, c);
        }
        adj_z(i, n + 1) = adj(i, n + 1) * d1;
        adj_z(i, n + 2) = abar_l * d1;
      }
    }
    const Matrix& below = ws.states[k];
    grad.weights[k].noalias() += adj_z * below.transpose();
    grad.biases[k] += adj_z.col(0);
    if (k > 0) {
      ws.adj_below.resize(net.weights[k].cols(), block);
      ws.adj_below.noalias() = net.weights[k].transpose() * adj_z;
      adj = ws.adj_below;
    }
  }
}

}  // namespace detail

/// Mean per-point loss over the batch and its exact parameter gradient.
/// `partials_at(index, jet)` supplies the per-point scalar loss and its
/// derivatives with respect to the jet components. Points are accumulated in
/// order; non-finite losses raise DivergenceError.
template <class Act = TanhActivation, class PartialsFn>
std::pair<double, ParamGrad> loss_param_grad_as(const MlpParams& net,
                                                std::span<const PointSample> points,
                                                PartialsFn&& partials_at) {
  if (points.empty()) throw ConfigError("loss_param_grad: empty point set");
  ParamGrad grad = ParamGrad::zero_like(net);
  JetWorkspace ws;
  PdeJet jet;
  Matrix input(1, net.input_dim());
  const int n = net.spatial_dim();
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    input.row(0).head(n) = points[i].x.transpose();
    input(0, n) = points[i].t;
    const Matrix& out = detail::forward_states<Act>(net, input, ws, true);
    detail::extract_jet(out, n, 0, jet);
    PointLoss pl = partials_at(i, jet);
    if (!std::isfinite(pl.loss)) {
      throw DivergenceError("non-finite point loss at batch index " + std::to_string(i));
    }
    loss_sum += pl.loss;
    detail::reverse_accumulate<Act>(net, ws, pl.partials, grad);
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  grad.scale(inv);
  return {loss_sum * inv, std::move(grad)};
}

template <class PartialsFn>
std::pair<double, ParamGrad> loss_param_grad(const MlpParams& net,
                                             std::span<const PointSample> points,
                                             PartialsFn&& partials_at) {
  return loss_param_grad_as<TanhActivation>(net, points,
                                            std::forward<PartialsFn>(partials_at));
}

}  // namespace hjb
