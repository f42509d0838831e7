#pragma once

#include <cmath>
#include <string>

#include "hjb/errors.hpp"
#include "hjb/jet.hpp"
#include "hjb/mlp.hpp"

namespace hjb {

enum class ProblemKind { Lqg, PowerHjb };
enum class TerminalKind { LogQuadratic, CoordinateSum };

/// One PDE instance. Two families are supported:
///   Lqg:      d_t u + lap u - mu |grad u|^2 = 0,           u(x,T) = ln((1+|x|^2)/2)
///   PowerHjb: d_t u + (sigma^2/2) lap u - sum_i A_i |d_i u|^{c_i} = phi,
///             u(x,T) = g(x)
/// The forcing phi is a constant; the terminal condition is one of the tagged
/// closed forms below. Keeping both as tags makes problems fully expressible
/// in run configs and lets the linear-solution family be detected exactly.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Lqg;
  int n = 1;
  double T = 1.0;
  double mu = 1.0;                  // Lqg only
  double sigma = std::sqrt(2.0);    // PowerHjb diffusion; Lqg fixes the Laplacian coefficient to 1
  Vector A;                         // PowerHjb, length n, all > 0
  Vector c;                         // PowerHjb, length n, all > 1
  double phi_value = 0.0;           // PowerHjb right-hand side (constant)
  TerminalKind terminal = TerminalKind::LogQuadratic;

  static ProblemSpec lqg(int n, double T, double mu) {
    ProblemSpec s;
    s.kind = ProblemKind::Lqg;
    s.n = n;
    s.T = T;
    s.mu = mu;
    s.terminal = TerminalKind::LogQuadratic;
    s.validate();
    return s;
  }

  static ProblemSpec power_hjb(int n, double T, double sigma, Vector A, Vector c,
                               double phi, TerminalKind terminal) {
    ProblemSpec s;
    s.kind = ProblemKind::PowerHjb;
    s.n = n;
    s.T = T;
    s.sigma = sigma;
    s.A = std::move(A);
    s.c = std::move(c);
    s.phi_value = phi;
    s.terminal = terminal;
    s.validate();
    return s;
  }

  /// The family with exact solution u(x,t) = sum_i x_i + T - t:
  /// sigma^2 = 2, A_i = 1/n, phi = -2, terminal g(x) = sum_i x_i.
  static ProblemSpec power_hjb_linear(int n, double T, double c_exponent) {
    return power_hjb(n, T, std::sqrt(2.0), Vector::Constant(n, 1.0 / n),
                     Vector::Constant(n, c_exponent), -2.0, TerminalKind::CoordinateSum);
  }

  bool is_linear_power_family() const {
    if (kind != ProblemKind::PowerHjb) return false;
    if (terminal != TerminalKind::CoordinateSum) return false;
    if (std::abs(sigma * sigma - 2.0) > 1e-12) return false;
    if (phi_value != -2.0) return false;
    for (int i = 0; i < n; ++i) {
      if (A(i) != 1.0 / n) return false;
    }
    return true;
  }

  bool has_exact_solution() const {
    return kind == ProblemKind::Lqg || is_linear_power_family();
  }

  void validate() const {
    if (n < 1) throw ConfigError("problem: n must be >= 1");
    if (!(T > 0.0)) throw ConfigError("problem: T must be > 0");
    if (kind == ProblemKind::Lqg) {
      if (!(mu > 0.0)) throw ConfigError("problem: lqg requires mu > 0");
      if (terminal != TerminalKind::LogQuadratic) {
        throw ConfigError("problem: lqg terminal cost is the log-quadratic form");
      }
    } else {
      if (!(sigma > 0.0)) throw ConfigError("problem: power_hjb requires sigma > 0");
      if (A.size() != n || c.size() != n) {
        throw ConfigError("problem: power_hjb A and c must have length n");
      }
      for (int i = 0; i < n; ++i) {
        if (!(A(i) > 0.0)) throw ConfigError("problem: power_hjb requires A_i > 0");
        if (!(c(i) > 1.0)) throw ConfigError("problem: power_hjb requires c_i > 1");
      }
    }
  }
};

/// Terminal cost g and its spatial gradient.
inline double terminal_value(const ProblemSpec& spec, const Vector& x) {
  switch (spec.terminal) {
    case TerminalKind::LogQuadratic:
      return std::log((1.0 + x.squaredNorm()) / 2.0);
    case TerminalKind::CoordinateSum:
      return x.sum();
  }
  throw ConfigError("unknown terminal kind");
}

inline Vector terminal_gradient(const ProblemSpec& spec, const Vector& x) {
  switch (spec.terminal) {
    case TerminalKind::LogQuadratic:
      return 2.0 * x / (1.0 + x.squaredNorm());
    case TerminalKind::CoordinateSum:
      return Vector::Ones(x.size());
  }
  throw ConfigError("unknown terminal kind");
}

struct ResidualResult {
  double residual = 0.0;
  ResidualPartials partials;
};

/// LQG residual d_t u + lap u - mu |grad u|^2 and its jet partials.
inline ResidualResult lqg_residual(const PdeJet& jet, double mu) {
  ResidualResult r;
  r.residual = jet.time_partial + jet.laplacian - mu * jet.spatial_grad.squaredNorm();
  r.partials.d_value = 0.0;
  r.partials.d_time_partial = 1.0;
  r.partials.d_laplacian = 1.0;
  r.partials.d_spatial_grad = -2.0 * mu * jet.spatial_grad;
  return r;
}

/// Power-cost residual d_t u + (sigma^2/2) lap u - sum A_i |d_i u|^{c_i} - phi(x,t).
/// The |p|^c partial is A_i c_i |p|^{c_i-1} sign(p), taken as 0 at p = 0
/// (the limit exists since c_i > 1).
inline ResidualResult power_hjb_residual(const PdeJet& jet, const Vector& /*x*/, double /*t*/,
                                         const ProblemSpec& spec) {
  ResidualResult r;
  const double half_sigma_sq = 0.5 * spec.sigma * spec.sigma;
  double power_sum = 0.0;
  r.partials.d_spatial_grad.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double p = jet.spatial_grad(i);
    const double ap = std::abs(p);
    power_sum += spec.A(i) * std::pow(ap, spec.c(i));
    r.partials.d_spatial_grad(i) =
        (p == 0.0) ? 0.0
                   : -spec.A(i) * spec.c(i) * std::pow(ap, spec.c(i) - 1.0) *
                         (p > 0.0 ? 1.0 : -1.0);
  }
  r.residual = jet.time_partial + half_sigma_sq * jet.laplacian - power_sum - spec.phi_value;
  r.partials.d_value = 0.0;
  r.partials.d_time_partial = 1.0;
  r.partials.d_laplacian = half_sigma_sq;
  return r;
}

/// Residual of whichever family the spec selects.
inline ResidualResult problem_residual(const PdeJet& jet, const Vector& x, double t,
                                       const ProblemSpec& spec) {
  return spec.kind == ProblemKind::Lqg ? lqg_residual(jet, spec.mu)
                                       : power_hjb_residual(jet, x, t, spec);
}

/// Terminal-condition residual u(x,T) - g(x).
inline double boundary_residual(double value_at_T, const Vector& x, const ProblemSpec& spec) {
  return value_at_T - terminal_value(spec, x);
}

// --- cost coefficients and control recovery -----------------------------------

/// Power-law running cost: r(x,y,t) = sum_i a_i |y_i|^{alpha_i} - phi(x,t).
struct CostSpec {
  Vector a;       // all > 0
  Vector alpha;   // all > 1 (otherwise the minimized term can be -inf)

  void validate() const {
    if (a.size() != alpha.size() || a.size() == 0) {
      throw ConfigError("cost: a and alpha must be non-empty and equal length");
    }
    for (int i = 0; i < a.size(); ++i) {
      if (!(a(i) > 0.0)) throw ConfigError("cost: a_i must be > 0");
      if (!(alpha(i) > 1.0)) throw ConfigError("cost: alpha_i must be > 1");
    }
  }
};

/// Maps the running-cost coefficients to the residual coefficients:
///   A_i = (a_i alpha_i)^(-1/(alpha_i-1)) - a_i (a_i alpha_i)^(-alpha_i/(alpha_i-1))
///   c_i = alpha_i / (alpha_i - 1)
inline std::pair<Vector, Vector> cost_to_hjb_coeffs(const CostSpec& cost) {
  cost.validate();
  const int n = static_cast<int>(cost.a.size());
  Vector A(n), c(n);
  for (int i = 0; i < n; ++i) {
    const double a = cost.a(i);
    const double alpha = cost.alpha(i);
    const double base = a * alpha;
    A(i) = std::pow(base, -1.0 / (alpha - 1.0)) -
           a * std::pow(base, -alpha / (alpha - 1.0));
    c(i) = alpha / (alpha - 1.0);
  }
  return {std::move(A), std::move(c)};
}

/// Minimizer of y -> a_i |y|^{alpha_i} + y * p_i per coordinate:
/// magnitude (|p_i| / (a_i alpha_i))^{1/(alpha_i-1)}, sign opposing p_i.
inline Vector recover_optimal_control(const Vector& spatial_grad, const CostSpec& cost) {
  cost.validate();
  if (spatial_grad.size() != cost.a.size()) {
    throw ConfigError("recover_optimal_control: gradient length mismatch");
  }
  Vector m(spatial_grad.size());
  for (int i = 0; i < spatial_grad.size(); ++i) {
    const double p = spatial_grad(i);
    if (p == 0.0) {
      m(i) = 0.0;
      continue;
    }
    const double mag = std::pow(std::abs(p) / (cost.a(i) * cost.alpha(i)),
                                1.0 / (cost.alpha(i) - 1.0));
    m(i) = p > 0.0 ? -mag : mag;
  }
  return m;
}

}  // namespace hjb
