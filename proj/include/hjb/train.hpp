#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hjb/adam.hpp"
#include "hjb/attack.hpp"
#include "hjb/errors.hpp"
#include "hjb/jet.hpp"
#include "hjb/metrics.hpp"
#include "hjb/mlp.hpp"
#include "hjb/problems.hpp"
#include "hjb/sampling.hpp"
#include "hjb/train_config.hpp"

namespace hjb {

struct CombinedLoss {
  double loss = 0.0;
  double domain_loss = 0.0;
  double boundary_loss = 0.0;     // unweighted mean boundary term
  double mean_residual_sq = 0.0;  // mean squared domain residual, any loss mode
  ParamGrad grad;
};

/// Loss over one batch and its exact parameter gradient:
///   squared modes:  (1/N1) sum r^2          + lambda (1/N2) sum b^2
///   lp mode:        (1/N1) sum |r|^p        + lambda (1/N2) sum |b|^p
/// The gradient composes as grad_domain + lambda * grad_boundary, so the
/// lambda dependence is exactly linear. Non-finite point losses (including
/// |r|^p overflow) raise DivergenceError.
inline CombinedLoss combined_loss_and_grad(const MlpParams& net, const CollocationBatch& batch,
                                           const ProblemSpec& problem, const TrainConfig& cfg) {
  const bool lp = cfg.loss_mode == LossMode::Lp;
  const double p = cfg.lp_p;
  CombinedLoss out;

  double residual_sq_sum = 0.0;
  auto domain_partials = [&](std::size_t idx, const PdeJet& jet) -> PointLoss {
    ResidualResult rr =
        problem_residual(jet, batch.domain[idx].x, batch.domain[idx].t, problem);
    const double r = rr.residual;
    residual_sq_sum += r * r;
    PointLoss pl;
    double scale;  // d(loss)/d(residual)
    if (lp) {
      const double ar = std::abs(r);
      pl.loss = std::pow(ar, p);
      scale = (r == 0.0) ? 0.0 : p * std::pow(ar, p - 1.0) * (r > 0.0 ? 1.0 : -1.0);
    } else {
      pl.loss = r * r;
      scale = 2.0 * r;
    }
    pl.partials.d_value = scale * rr.partials.d_value;
    pl.partials.d_time_partial = scale * rr.partials.d_time_partial;
    pl.partials.d_laplacian = scale * rr.partials.d_laplacian;
    pl.partials.d_spatial_grad = scale * rr.partials.d_spatial_grad;
    return pl;
  };
  auto [domain_loss, domain_grad] =
      loss_param_grad(net, std::span<const PointSample>(batch.domain), domain_partials);
  out.domain_loss = domain_loss;
  out.mean_residual_sq = residual_sq_sum / static_cast<double>(batch.domain.size());

  std::vector<PointSample> boundary_points(batch.boundary.size());
  for (std::size_t k = 0; k < batch.boundary.size(); ++k) {
    boundary_points[k].x = batch.boundary[k];
    boundary_points[k].t = problem.T;
  }
  auto boundary_partials = [&](std::size_t idx, const PdeJet& jet) -> PointLoss {
    const double b = boundary_residual(jet.value, boundary_points[idx].x, problem);
    PointLoss pl;
    if (lp) {
      const double ab = std::abs(b);
      pl.loss = std::pow(ab, p);
      pl.partials.d_value =
          (b == 0.0) ? 0.0 : p * std::pow(ab, p - 1.0) * (b > 0.0 ? 1.0 : -1.0);
    } else {
      pl.loss = b * b;
      pl.partials.d_value = 2.0 * b;
    }
    pl.partials.d_spatial_grad = Vector::Zero(problem.n);
    return pl;
  };
  auto [boundary_loss, boundary_grad] = loss_param_grad(
      net, std::span<const PointSample>(boundary_points), boundary_partials);
  out.boundary_loss = boundary_loss;

  out.loss = domain_loss + cfg.lambda * boundary_loss;
  if (!std::isfinite(out.loss)) {
    throw DivergenceError("non-finite combined loss");
  }
  out.grad = std::move(domain_grad);
  out.grad.add_scaled(boundary_grad, cfg.lambda);
  return out;
}

struct TraceRow {
  int iter = 0;
  double domain_loss = 0.0;
  double boundary_loss = 0.0;
  double lr = 0.0;
  double post_attack_residual_sq = 0.0;
};

struct EvalSettings {
  int S = 10000;
  int oracle_mc_samples = 10000;
  std::uint64_t seed = 424242;  // shared across runs so comparisons see the same draws
};

struct TrainHooks {
  int checkpoint_interval = 0;
  std::function<void(int, const MlpParams&)> on_checkpoint;
};

/// Reproducible run artifact: config snapshot, the per-iteration trace, final
/// metrics when the problem has an oracle, and the abort reason if the run
/// diverged (partial trace preserved).
struct RunRecord {
  TrainConfig config;
  std::vector<TraceRow> trace;
  std::optional<MetricsRecord> metrics;
  double wall_seconds = 0.0;
  int attack_faults = 0;
  std::string abort_reason;

  bool aborted() const { return !abort_reason.empty(); }
};

/// The full training loop: per iteration, sample a fresh batch, run the inner
/// maximization per the loss mode and attack toggles, take one Adam step at
/// lr0 * (1 - i/M). With loss_mode = l2 (or K = 0) this is the plain
/// squared-loss baseline, bit-identical to adversarial mode at K = 0.
inline RunRecord train(const ProblemSpec& problem, const TrainConfig& cfg, MlpParams& net,
                       const EvalSettings& eval = {}, const ExecPolicy& exec = {},
                       const TrainHooks& hooks = {}) {
  cfg.validate();
  net.validate();
  if (net.input_dim() != problem.n + 1) {
    throw ConfigError("train: network input dim must equal n + 1");
  }
  RunRecord rec;
  rec.config = cfg;
  rec.trace.reserve(cfg.M);
  OptState opt_state = OptState::zero_like(net);
  const auto t_start = std::chrono::steady_clock::now();
  for (int i = 1; i <= cfg.M; ++i) {
    const double lr = cfg.lr0 * (1.0 - static_cast<double>(i) / cfg.M);
    try {
      RngStream batch_stream(cfg.seed, "train-batch", static_cast<std::uint64_t>(i));
      CollocationBatch batch = sample_batch(problem.n, problem.T, cfg.N1, cfg.N2, batch_stream);
      int faults = 0;
      CollocationBatch attacked = pgd_attack(net, batch, problem, cfg, exec, &faults);
      rec.attack_faults += faults;
      CombinedLoss cl = combined_loss_and_grad(net, attacked, problem, cfg);
      adam_update(opt_state, net, cl.grad, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
      rec.trace.push_back({i, cl.domain_loss, cl.boundary_loss, lr, cl.mean_residual_sq});
    } catch (const DivergenceError& e) {
      rec.abort_reason = "iteration " + std::to_string(i) + ": " + e.what();
      break;
    }
    if (hooks.checkpoint_interval > 0 && hooks.on_checkpoint &&
        i % hooks.checkpoint_interval == 0) {
      hooks.on_checkpoint(i, net);
    }
  }
  if (!rec.aborted() && eval.S > 0 && problem.has_exact_solution()) {
    rec.metrics = relative_errors(net, problem, eval.S, eval.seed,
                                  eval.oracle_mc_samples, exec);
  }
  rec.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start).count();
  return rec;
}

}  // namespace hjb
