#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "hjb/jet.hpp"
#include "hjb/mlp.hpp"
#include "hjb/parallel.hpp"
#include "hjb/problems.hpp"
#include "hjb/sampling.hpp"
#include "hjb/train_config.hpp"

namespace hjb {

namespace detail {

// Ascent step direction. Zero gradients step positive, so a stationary start
// still moves by eta per iteration.
inline double step_sign(double g) { return g >= 0.0 ? 1.0 : -1.0; }

inline void project_point(Vector& x, double& t, double t_max,
                          const std::optional<double>& radius) {
  if (t < 0.0) t = 0.0;
  if (t > t_max) t = t_max;
  if (radius) {
    const double nrm = x.norm();
    if (nrm > *radius) x *= (*radius / nrm);
  }
}

}  // namespace detail

struct AttackOptions {
  int K = 0;
  double eta = 0.0;
  double fd_step = 1e-3;
  double t_max = 1.0;
  std::optional<double> x_clamp_radius;
  bool attack_time = true;

  static AttackOptions from(const TrainConfig& cfg) {
    return AttackOptions{cfg.K,   cfg.eta,           cfg.fd_step,
                         cfg.t_max, cfg.x_clamp_radius, cfg.attack_time};
  }
};

/// Projected sign-ascent on the squared point residual, with the (x, t)
/// gradient estimated by central finite differences of r^2. `residual_fn`
/// maps (x, t) to the scalar residual. Returns the number of faults (0 or 1):
/// a non-finite residual freezes the point at its last finite position.
template <class ResidualFn>
int attack_domain_point(Vector& x, double& t, ResidualFn&& residual_fn,
                        const AttackOptions& opt) {
  const int n = static_cast<int>(x.size());
  const int dims = opt.attack_time ? n + 1 : n;
  const double h = opt.fd_step;
  Vector xp(n);
  Vector last_x = x;
  double last_t = t;
  for (int j = 0; j < opt.K; ++j) {
    const double r_here = residual_fn(x, t);
    if (!std::isfinite(r_here)) {
      x = last_x;
      t = last_t;
      return 1;
    }
    last_x = x;
    last_t = t;
    Vector step(dims);
    bool finite = true;
    for (int d = 0; d < dims && finite; ++d) {
      double r_plus, r_minus;
      if (d < n) {
        xp = x;
        xp(d) = x(d) + h;
        r_plus = residual_fn(xp, t);
        xp(d) = x(d) - h;
        r_minus = residual_fn(xp, t);
      } else {
        r_plus = residual_fn(x, t + h);
        r_minus = residual_fn(x, t - h);
      }
      if (!std::isfinite(r_plus) || !std::isfinite(r_minus)) {
        finite = false;
        break;
      }
      step(d) = detail::step_sign(r_plus * r_plus - r_minus * r_minus);
    }
    if (!finite) return 1;  // frozen at the current (finite) position
    x += opt.eta * step.head(n);
    if (opt.attack_time) t += opt.eta * step(n);
    detail::project_point(x, t, opt.t_max, opt.x_clamp_radius);
  }
  if (opt.K > 0 && !std::isfinite(residual_fn(x, t))) {
    x = last_x;
    t = last_t;
    return 1;
  }
  return 0;
}

/// Projected sign-ascent on the squared boundary residual with exact spatial
/// gradients: `boundary_fn(x)` returns (b, grad_x b). Time stays pinned at T.
template <class BoundaryFn>
int attack_boundary_point(Vector& x, BoundaryFn&& boundary_fn, const AttackOptions& opt) {
  Vector last_x = x;
  for (int j = 0; j < opt.K; ++j) {
    auto [b, grad] = boundary_fn(x);
    if (!std::isfinite(b) || !grad.allFinite()) {
      x = last_x;
      return 1;
    }
    last_x = x;
    for (int d = 0; d < x.size(); ++d) {
      x(d) += opt.eta * detail::step_sign(2.0 * b * grad(d));
    }
    if (opt.x_clamp_radius) {
      const double nrm = x.norm();
      if (nrm > *opt.x_clamp_radius) x *= (*opt.x_clamp_radius / nrm);
    }
  }
  if (opt.K > 0) {
    if (!std::isfinite(boundary_fn(x).first)) {
      x = last_x;
      return 1;
    }
  }
  return 0;
}

namespace detail {

inline double residual_from_jet_row(const Matrix& jet_rows, int row, const Vector& x,
                                    double t, const ProblemSpec& spec) {
  const int n = spec.n;
  if (spec.kind == ProblemKind::Lqg) {
    double grad_sq = 0.0;
    for (int i = 0; i < n; ++i) grad_sq += jet_rows(row, 1 + i) * jet_rows(row, 1 + i);
    return jet_rows(row, n + 1) + jet_rows(row, n + 2) - spec.mu * grad_sq;
  }
  double power_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    power_sum += spec.A(i) * std::pow(std::abs(jet_rows(row, 1 + i)), spec.c(i));
  }
  return jet_rows(row, n + 1) + 0.5 * spec.sigma * spec.sigma * jet_rows(row, n + 2) -
         power_sum - spec.phi_value;
}

/// Batched inner loop for one domain point: every iteration evaluates the
/// 2*dims finite-difference probes plus the center in a single jet batch.
inline int attack_domain_point_batched(const MlpParams& net, const ProblemSpec& spec,
                                       Vector& x, double& t, const AttackOptions& opt,
                                       JetWorkspace& ws, Matrix& probes, Matrix& jet_rows) {
  const int n = spec.n;
  const int dims = opt.attack_time ? n + 1 : n;
  const int rows = 2 * dims + 1;
  const double h = opt.fd_step;
  probes.resize(rows, n + 1);
  Vector last_x = x;
  double last_t = t;
  auto fill_probes = [&] {
    for (int r = 0; r < rows; ++r) {
      probes.row(r).head(n) = x.transpose();
      probes(r, n) = t;
    }
    for (int d = 0; d < dims; ++d) {
      if (d < n) {
        probes(2 * d, d) += h;
        probes(2 * d + 1, d) -= h;
      } else {
        probes(2 * d, n) += h;
        probes(2 * d + 1, n) -= h;
      }
    }
  };
  for (int j = 0; j < opt.K; ++j) {
    fill_probes();
    forward_jet_batch_rows(net, probes, jet_rows, ws);
    const double r_here = residual_from_jet_row(jet_rows, rows - 1, x, t, spec);
    if (!std::isfinite(r_here)) {
      x = last_x;
      t = last_t;
      return 1;
    }
    last_x = x;
    last_t = t;
    bool finite = true;
    Vector step(dims);
    for (int d = 0; d < dims; ++d) {
      const double r_plus = residual_from_jet_row(jet_rows, 2 * d, x, t, spec);
      const double r_minus = residual_from_jet_row(jet_rows, 2 * d + 1, x, t, spec);
      if (!std::isfinite(r_plus) || !std::isfinite(r_minus)) {
        finite = false;
        break;
      }
      step(d) = step_sign(r_plus * r_plus - r_minus * r_minus);
    }
    if (!finite) return 1;
    x += opt.eta * step.head(n);
    if (opt.attack_time) t += opt.eta * step(n);
    project_point(x, t, opt.t_max, opt.x_clamp_radius);
  }
  if (opt.K > 0) {
    probes.resize(1, n + 1);
    probes.row(0).head(n) = x.transpose();
    probes(0, n) = t;
    forward_jet_batch_rows(net, probes, jet_rows, ws);
    if (!std::isfinite(residual_from_jet_row(jet_rows, 0, x, t, spec))) {
      x = last_x;
      t = last_t;
      return 1;
    }
  }
  return 0;
}

}  // namespace detail

/// Algorithm inner loop over a whole batch. Domain and boundary attacks run
/// independently per the config toggles; K = 0 (or l2/lp loss modes) returns
/// the batch unchanged. Faults (points frozen after a non-finite residual)
/// are counted into *faults when given. Per-point work is pure, so threading
/// never changes the result.
inline CollocationBatch pgd_attack(const MlpParams& net, const CollocationBatch& batch,
                                   const ProblemSpec& problem, const TrainConfig& cfg,
                                   const ExecPolicy& exec = {}, int* faults = nullptr) {
  CollocationBatch out = batch;
  if (cfg.K == 0 || cfg.loss_mode != LossMode::Adversarial) {
    if (faults) *faults = 0;
    return out;
  }
  AttackOptions opt = AttackOptions::from(cfg);
  std::vector<int> fault_flags(out.domain.size() + out.boundary.size(), 0);
  struct Scratch {
    JetWorkspace ws;
    Matrix probes, jet_rows;
    std::vector<PdeJet> jets;
  };
  std::vector<Scratch> scratch(std::max(1, exec.threads));
  if (cfg.attack_domain) {
    parallel_for_workers(out.domain.size(), exec, [&](std::size_t i, std::size_t w) {
      Scratch& s = scratch[w];
      fault_flags[i] = detail::attack_domain_point_batched(
          net, problem, out.domain[i].x, out.domain[i].t, opt, s.ws, s.probes, s.jet_rows);
    });
  }
  if (cfg.attack_boundary) {
    parallel_for_workers(out.boundary.size(), exec, [&](std::size_t i, std::size_t w) {
      Scratch& s = scratch[w];
      s.probes.resize(1, problem.n + 1);
      auto boundary_fn = [&](const Vector& x) -> std::pair<double, Vector> {
        s.probes.row(0).head(problem.n) = x.transpose();
        s.probes(0, problem.n) = problem.T;
        forward_jet_batch(net, s.probes, s.jets, s.ws);
        const double b = boundary_residual(s.jets[0].value, x, problem);
        Vector grad = s.jets[0].spatial_grad - terminal_gradient(problem, x);
        return {b, std::move(grad)};
      };
      fault_flags[out.domain.size() + i] =
          attack_boundary_point(out.boundary[i], boundary_fn, opt);
    });
  }
  if (faults) {
    int total = 0;
    for (int f : fault_flags) total += f;
    *faults = total;
  }
  return out;
}

}  // namespace hjb
