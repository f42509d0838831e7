#pragma once

#include <cmath>
#include <cstdint>

#include "hjb/errors.hpp"
#include "hjb/problems.hpp"
#include "hjb/rng.hpp"

namespace hjb {

/// Exact-solution sample: value, spatial gradient, and the Monte-Carlo
/// standard error of the value (0 for closed-form branches).
struct OracleValue {
  double value = 0.0;
  Vector spatial_grad;
  double stderr_value = 0.0;
};

namespace detail {

inline double lqg_weight(const Vector& z, double mu) {
  // exp(-mu * g(z)) with g(z) = ln((1+|z|^2)/2)  ==  ((1+|z|^2)/2)^(-mu)
  return std::pow((1.0 + z.squaredNorm()) / 2.0, -mu);
}

}  // namespace detail

/// LQG solution estimated over an explicit antithetic sample set: each row of
/// `samples` is one y ~ N(0,I); its mirror -y is paired implicitly. The value
/// is -(1/mu) ln mean(w), w(y) = exp(-mu g(x - s y)), s = sqrt(2(T-t)); the
/// gradient reuses the same samples (differentiation under the integral):
/// grad = mean(w * grad_g(x - s y)) / mean(w). The stderr comes from the
/// per-pair sample variance through the delta method for -(1/mu) ln(.).
/// Exposing the sample set keeps common-random-number and transformed-sample
/// comparisons exact.
inline OracleValue lqg_exact_with_samples(const Vector& x, double t, const ProblemSpec& spec,
                                          const Matrix& samples) {
  if (spec.kind != ProblemKind::Lqg) throw ConfigError("lqg_exact: not an LQG problem");
  if (t < 0.0 || t > spec.T) throw ConfigError("lqg_exact: t outside [0, T]");
  const int n = spec.n;
  OracleValue out;
  if (t == spec.T) {
    out.value = terminal_value(spec, x);
    out.spatial_grad = terminal_gradient(spec, x);
    out.stderr_value = 0.0;
    return out;
  }
  const long pairs = samples.rows();
  if (pairs < 1) throw ConfigError("lqg_exact: needs at least one sample pair");
  const double s = std::sqrt(2.0 * (spec.T - t));
  double sum_w = 0.0, sum_w_sq = 0.0, half_range = 0.0;
  Vector grad_sum = Vector::Zero(n);
  Vector z(n);
  for (long j = 0; j < pairs; ++j) {
    z = x - s * samples.row(j).transpose();
    const double w_plus = detail::lqg_weight(z, spec.mu);
    const double g_plus = (1.0 + z.squaredNorm());
    grad_sum += w_plus * (2.0 / g_plus) * z;
    z = x + s * samples.row(j).transpose();
    const double w_minus = detail::lqg_weight(z, spec.mu);
    const double g_minus = (1.0 + z.squaredNorm());
    grad_sum += w_minus * (2.0 / g_minus) * z;
    const double pair_mean = 0.5 * (w_plus + w_minus);
    sum_w += pair_mean;
    sum_w_sq += pair_mean * pair_mean;
    half_range = 0.5 * std::abs(w_plus - w_minus);
  }
  const double mean_w = sum_w / static_cast<double>(pairs);
  out.value = -std::log(mean_w) / spec.mu;
  out.spatial_grad = grad_sum / (2.0 * static_cast<double>(pairs) * mean_w);
  if (pairs > 1) {
    const double var =
        (sum_w_sq - static_cast<double>(pairs) * mean_w * mean_w) /
        (static_cast<double>(pairs) - 1.0);
    const double se_mean = std::sqrt(std::max(var, 0.0) / static_cast<double>(pairs));
    out.stderr_value = se_mean / (spec.mu * mean_w);
  } else {
    // one pair cannot estimate a variance; use the half-range of the two
    // antithetic halves so the estimate still reads as stochastic
    out.stderr_value = half_range / (2.0 * spec.mu * mean_w);
  }
  return out;
}

/// Draws mc_samples/2 antithetic pairs from a stream keyed by the seed and
/// defers to the explicit-sample core. Deterministic per (seed, x-independent),
/// so evaluations at nearby x share the same draws (common random numbers).
inline OracleValue lqg_exact(const Vector& x, double t, const ProblemSpec& spec,
                             int mc_samples, std::uint64_t seed) {
  if (spec.kind != ProblemKind::Lqg) throw ConfigError("lqg_exact: not an LQG problem");
  if (t < 0.0 || t > spec.T) throw ConfigError("lqg_exact: t outside [0, T]");
  if (t == spec.T) {
    OracleValue out;
    out.value = terminal_value(spec, x);
    out.spatial_grad = terminal_gradient(spec, x);
    return out;
  }
  if (mc_samples < 2) throw ConfigError("lqg_exact: mc_samples must be >= 2 for t < T");
  const long pairs = mc_samples / 2;
  RngStream stream(seed, "lqg-oracle");
  Matrix samples(pairs, spec.n);
  for (long j = 0; j < pairs; ++j) {
    for (int i = 0; i < spec.n; ++i) samples(j, i) = stream.gaussian();
  }
  return lqg_exact_with_samples(x, t, spec, samples);
}

/// Closed form for the linear power-cost family: u(x,t) = sum_i x_i + T - t.
inline OracleValue power_hjb_exact(const Vector& x, double t, const ProblemSpec& spec) {
  if (!spec.is_linear_power_family()) {
    throw ConfigError("power_hjb_exact: no closed-form solution for this spec");
  }
  OracleValue out;
  out.value = x.sum() + (spec.T - t);
  out.spatial_grad = Vector::Ones(spec.n);
  out.stderr_value = 0.0;
  return out;
}

/// Dispatch to whichever oracle the problem admits.
inline OracleValue problem_exact(const Vector& x, double t, const ProblemSpec& spec,
                                 int mc_samples, std::uint64_t seed) {
  if (spec.kind == ProblemKind::Lqg) return lqg_exact(x, t, spec, mc_samples, seed);
  return power_hjb_exact(x, t, spec);
}

}  // namespace hjb
