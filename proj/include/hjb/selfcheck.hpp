#pragma once

// Built-in verification suites behind the `check` subcommand: finite-difference
// cross-checks of the jet engine, the exact-solution fixed point, oracle
// identities, and the norm-estimator sanity checks. Self-contained (no files,
// no network) so it can run in any environment.

#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hjb/jet.hpp"
#include "hjb/metrics.hpp"
#include "hjb/oracle.hpp"
#include "hjb/problems.hpp"
#include "hjb/train.hpp"

namespace hjb::selfcheck {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

/// Scalar forward pass independent of the jet propagation (plain layer loop).
inline double plain_value(const MlpParams& net, const Vector& x, double t) {
  Vector v(net.input_dim());
  v.head(x.size()) = x;
  v(x.size()) = t;
  for (int k = 0; k < net.layer_count(); ++k) {
    Vector z = net.weights[k] * v + net.biases[k];
    if (k + 1 < net.layer_count()) {
      for (int i = 0; i < z.size(); ++i) z(i) = std::tanh(z(i));
    }
    v = std::move(z);
  }
  return v(0);
}

inline double rel_err(double estimate, double reference) {
  return std::abs(estimate - reference) / std::max(std::abs(reference), 1.0);
}

}  // namespace detail

/// Jets vs central finite differences of the plain forward pass over random
/// networks (n <= 8, width <= 32). `jet_fn` is pluggable so a deliberately
/// broken engine can be shown to fail.
inline CheckResult jet_fd_check(
    const std::function<PdeJet(const MlpParams&, const Vector&, double)>& jet_fn,
    int num_nets = 8, double tol = 1e-6) {
  const double h = 1e-4;
  double worst = 0.0;
  for (int s = 0; s < num_nets; ++s) {
    RngStream meta(s, "check-shapes");
    const int n = 2 + static_cast<int>(meta.bits() % 7);   // 2..8
    const int width = 8 + static_cast<int>(meta.bits() % 25);  // 8..32
    auto net = init_network({n + 1, width, width, 1}, s);
    RngStream points(s, "check-points");
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = points.gaussian();
    const double t = points.uniform01();
    PdeJet jet = jet_fn(net, x, t);
    worst = std::max(worst, detail::rel_err(jet.time_partial,
                                            (detail::plain_value(net, x, t + h) -
                                             detail::plain_value(net, x, t - h)) /
                                                (2 * h)));
    const double center = detail::plain_value(net, x, t);
    double lap_fd = 0.0;
    Vector xp = x;
    for (int i = 0; i < n; ++i) {
      xp(i) = x(i) + h;
      const double up = detail::plain_value(net, xp, t);
      xp(i) = x(i) - h;
      const double um = detail::plain_value(net, xp, t);
      xp(i) = x(i);
      worst = std::max(worst, detail::rel_err(jet.spatial_grad(i), (up - um) / (2 * h)));
      lap_fd += (up - 2.0 * center + um) / (h * h);
    }
    worst = std::max(worst, detail::rel_err(jet.laplacian, lap_fd));
    worst = std::max(worst, detail::rel_err(jet.value, center));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel err %.2e over %d nets", worst, num_nets);
  return {"jet-vs-finite-differences", worst <= tol, buf};
}

inline CheckResult jet_fd_check() {
  return jet_fd_check(
      [](const MlpParams& net, const Vector& x, double t) { return forward_jet(net, x, t); });
}

/// Parameter gradient of the squared LQG residual vs finite differences.
inline CheckResult param_grad_fd_check(double tol = 1e-4) {
  const double mu = 1.0;
  auto net = init_network({4, 6, 6, 1}, 17);
  std::vector<PointSample> pts(2);
  RngStream stream(17, "check-grad-points");
  for (auto& p : pts) {
    p.x.resize(3);
    for (int i = 0; i < 3; ++i) p.x(i) = stream.gaussian();
    p.t = stream.uniform01();
  }
  auto partials = [&](std::size_t, const PdeJet& jet) {
    auto rr = lqg_residual(jet, mu);
    PointLoss pl;
    pl.loss = rr.residual * rr.residual;
    const double s = 2.0 * rr.residual;
    pl.partials.d_value = s * rr.partials.d_value;
    pl.partials.d_time_partial = s * rr.partials.d_time_partial;
    pl.partials.d_laplacian = s * rr.partials.d_laplacian;
    pl.partials.d_spatial_grad = s * rr.partials.d_spatial_grad;
    return pl;
  };
  auto [loss, grad] = loss_param_grad(net, std::span<const PointSample>(pts), partials);
  auto loss_of = [&](const MlpParams& probe) {
    double sum = 0.0;
    for (const auto& p : pts) {
      auto rr = lqg_residual(forward_jet(probe, p.x, p.t), mu);
      sum += rr.residual * rr.residual;
    }
    return sum / pts.size();
  };
  const double h = 1e-4;
  double worst = 0.0;
  MlpParams probe = net;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (int i = 0; i < net.weights[k].rows(); ++i) {
      for (int j = 0; j < net.weights[k].cols(); ++j) {
        probe.weights[k](i, j) = net.weights[k](i, j) + h;
        const double up = loss_of(probe);
        probe.weights[k](i, j) = net.weights[k](i, j) - h;
        const double um = loss_of(probe);
        probe.weights[k](i, j) = net.weights[k](i, j);
        worst = std::max(worst, detail::rel_err(grad.weights[k](i, j), (up - um) / (2 * h)));
      }
    }
    for (int i = 0; i < net.biases[k].size(); ++i) {
      probe.biases[k](i) = net.biases[k](i) + h;
      const double up = loss_of(probe);
      probe.biases[k](i) = net.biases[k](i) - h;
      const double um = loss_of(probe);
      probe.biases[k](i) = net.biases[k](i);
      worst = std::max(worst, detail::rel_err(grad.biases[k](i), (up - um) / (2 * h)));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel err %.2e", worst);
  return {"param-grad-vs-finite-differences", worst <= tol, buf};
}

/// The linear power-cost solution must zero the residual and the loss.
inline CheckResult exact_solution_check() {
  double worst_residual = 0.0, worst_loss = 0.0;
  for (double c : {1.25, 1.5, 1.75}) {
    for (int n : {1, 10, 100}) {
      auto spec = ProblemSpec::power_hjb_linear(n, 1.0, c);
      PdeJet jet;
      jet.value = 0.0;
      jet.spatial_grad = Vector::Ones(n);
      jet.time_partial = -1.0;
      jet.laplacian = 0.0;
      auto rr = power_hjb_residual(jet, Vector::Zero(n), 0.3, spec);
      worst_residual = std::max(worst_residual, std::abs(rr.residual));
      if (n >= 2) {
        MlpParams net;
        net.layer_dims = {n + 1, 1};
        Matrix w = Matrix::Ones(1, n + 1);
        w(0, n) = -1.0;
        net.weights.push_back(w);
        net.biases.push_back(Vector::Constant(1, spec.T));
        RngStream stream(3, "check-exact", n);
        auto batch = sample_batch(n, spec.T, 8, 8, stream);
        TrainConfig cfg;
        cfg.t_max = spec.T;
        auto cl = combined_loss_and_grad(net, batch, spec, cfg);
        worst_loss = std::max(worst_loss, cl.loss);
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max |residual| %.2e, max loss %.2e", worst_residual,
                worst_loss);
  return {"linear-solution-fixed-point", worst_residual <= 1e-12 && worst_loss <= 1e-12, buf};
}

/// Oracle must collapse to the terminal cost at t = T.
inline CheckResult oracle_boundary_check() {
  auto spec = ProblemSpec::lqg(8, 1.0, 1.0);
  RngStream stream(23, "check-oracle");
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Vector x(8);
    for (int i = 0; i < 8; ++i) x(i) = stream.gaussian();
    auto v = lqg_exact(x, spec.T, spec, 2, 0);
    worst = std::max(worst, std::abs(v.value - terminal_value(spec, x)));
    worst = std::max(worst, (v.spatial_grad - terminal_gradient(spec, x)).norm());
    if (v.stderr_value != 0.0) worst = std::max(worst, 1.0);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max boundary deviation %.2e", worst);
  return {"oracle-terminal-identity", worst == 0.0, buf};
}

/// Norm estimator: exact on constants, matches E X^2 = 1/3 on U(0,1).
inline CheckResult estimator_check() {
  RngStream s1(31, "check-lp-const");
  auto [cn, cse] = estimate_lp_norm([](RngStream&) { return 1.0; }, 8.0, 500, s1);
  RngStream s2(31, "check-lp-x");
  const int N = 200000;
  auto [norm, se] = estimate_lp_norm([](RngStream& s) { return s.uniform01(); }, 2.0, N, s2);
  const double truth = std::sqrt(1.0 / 3.0);
  const bool pass = cn == 1.0 && cse == 0.0 &&
                    std::abs(norm - truth) <= 4.0 * se / (2.0 * truth) + 1e-12;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "|f|=1 -> %.3f +- %.1e; L2(X) = %.5f (exact %.5f)", cn, cse,
                norm, truth);
  return {"lp-norm-estimator", pass, buf};
}

inline std::vector<CheckResult> run_all() {
  return {jet_fd_check(), param_grad_fd_check(), exact_solution_check(),
          oracle_boundary_check(), estimator_check()};
}

}  // namespace hjb::selfcheck
