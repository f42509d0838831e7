#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/jet.hpp"
#include "hjb/oracle.hpp"
#include "hjb/parallel.hpp"
#include "hjb/problems.hpp"
#include "hjb/rng.hpp"

namespace hjb {

/// Relative errors of the learned solution against the exact one, all three
/// computed on the identical sample set:
///   l1  = sum |u* - u| / sum |u*|
///   l2  = sqrt( sum (u* - u)^2 / sum u*^2 )
///   w11 = sum (|u* - u| + sum_i |d_i u* - d_i u|) /
///         sum (|u*| + sum_i |d_i u*|)
struct MetricsRecord {
  double l1_rel = 0.0;
  double l2_rel = 0.0;
  double w11_rel = 0.0;
  int samples_S = 0;
  std::uint64_t seed = 0;
};

/// Point evaluation used by the metric core: value plus spatial gradient.
struct ValueAndGrad {
  double value = 0.0;
  Vector grad;
};

/// Metric core over two callables (x, t, index) -> ValueAndGrad. Samples S
/// i.i.d. uniform points in [0,1]^n x [0,T]; per-point results are stored and
/// reduced in sample order, so threading cannot change the sums.
template <class OracleFn, class ApproxFn>
MetricsRecord relative_errors_core(OracleFn&& oracle_fn, ApproxFn&& approx_fn, int n,
                                   double T, int S, std::uint64_t seed,
                                   const ExecPolicy& exec = {}) {
  if (S < 1) throw ConfigError("relative_errors: S must be >= 1");
  std::vector<PointSample> points(S);
  {
    RngStream stream(seed, "eval-points");
    for (int j = 0; j < S; ++j) {
      points[j].x.resize(n);
      for (int i = 0; i < n; ++i) points[j].x(i) = stream.uniform01();
      points[j].t = stream.uniform(0.0, T);
    }
  }
  struct Row {
    double abs_diff, abs_ref, sq_diff, sq_ref, grad_diff_l1, grad_ref_l1;
  };
  std::vector<Row> rows(S);
  parallel_for(static_cast<std::size_t>(S), exec, [&](std::size_t j) {
    ValueAndGrad ref = oracle_fn(points[j].x, points[j].t, j);
    ValueAndGrad est = approx_fn(points[j].x, points[j].t, j);
    const double d = ref.value - est.value;
    rows[j].abs_diff = std::abs(d);
    rows[j].abs_ref = std::abs(ref.value);
    rows[j].sq_diff = d * d;
    rows[j].sq_ref = ref.value * ref.value;
    rows[j].grad_diff_l1 = (ref.grad - est.grad).cwiseAbs().sum();
    rows[j].grad_ref_l1 = ref.grad.cwiseAbs().sum();
  });
  double sum_abs_diff = 0, sum_abs_ref = 0, sum_sq_diff = 0, sum_sq_ref = 0;
  double sum_w11_num = 0, sum_w11_den = 0;
  for (const Row& r : rows) {
    sum_abs_diff += r.abs_diff;
    sum_abs_ref += r.abs_ref;
    sum_sq_diff += r.sq_diff;
    sum_sq_ref += r.sq_ref;
    sum_w11_num += r.abs_diff + r.grad_diff_l1;
    sum_w11_den += r.abs_ref + r.grad_ref_l1;
  }
  MetricsRecord rec;
  rec.l1_rel = sum_abs_diff / sum_abs_ref;
  rec.l2_rel = std::sqrt(sum_sq_diff / sum_sq_ref);
  rec.w11_rel = sum_w11_num / sum_w11_den;
  rec.samples_S = S;
  rec.seed = seed;
  return rec;
}

/// Relative errors of a network against the problem oracle. The LQG oracle
/// stream is keyed by (seed, point index) so the same seed reproduces the
/// same draws at any thread count.
inline MetricsRecord relative_errors(const MlpParams& net, const ProblemSpec& problem,
                                     int S, std::uint64_t seed, int oracle_mc_samples,
                                     const ExecPolicy& exec = {}) {
  if (!problem.has_exact_solution()) {
    throw ConfigError("relative_errors: problem has no exact-solution oracle");
  }
  auto oracle_fn = [&](const Vector& x, double t, std::size_t j) -> ValueAndGrad {
    OracleValue v = problem_exact(x, t, problem, oracle_mc_samples,
                                  mix64(seed ^ mix64(j)));
    return {v.value, std::move(v.spatial_grad)};
  };
  auto approx_fn = [&](const Vector& x, double t, std::size_t) -> ValueAndGrad {
    PdeJet jet = forward_jet(net, x, t);
    return {jet.value, std::move(jet.spatial_grad)};
  };
  return relative_errors_core(oracle_fn, approx_fn, problem.n, problem.T, S, seed, exec);
}

/// Monte-Carlo L^p norm estimate: point_fn draws its own sample from the
/// stream and returns f(X). Returns ((1/N) sum |f|^p)^(1/p) and the sample
/// standard error of the mean of |f|^p. A non-finite mean power (overflow at
/// large p) is reported as an error rather than returned.
inline std::pair<double, double> estimate_lp_norm(
    const std::function<double(RngStream&)>& point_fn, double p, int N, RngStream& stream) {
  if (N < 2) throw ConfigError("estimate_lp_norm: N must be >= 2");
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < N; ++i) {
    const double f = point_fn(stream);
    const double fp = std::pow(std::abs(f), p);
    sum += fp;
    sum_sq += fp * fp;
  }
  const double mean = sum / N;
  if (!std::isfinite(mean) || !std::isfinite(sum_sq)) {
    throw DivergenceError("estimate_lp_norm: |f|^p overflowed at p = " + std::to_string(p));
  }
  const double var = std::max(0.0, (sum_sq - N * mean * mean) / (N - 1.0));
  const double stderr_mean = std::sqrt(var / N);
  return {std::pow(mean, 1.0 / p), stderr_mean};
}

}  // namespace hjb
