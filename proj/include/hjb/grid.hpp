#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "hjb/errors.hpp"
#include "hjb/jet.hpp"
#include "hjb/oracle.hpp"
#include "hjb/parallel.hpp"
#include "hjb/problems.hpp"

namespace hjb {

enum class GridChannel { Value, GradNorm, AbsError, GradError };

inline const char* grid_channel_name(GridChannel c) {
  switch (c) {
    case GridChannel::Value: return "value";
    case GridChannel::GradNorm: return "grad_norm";
    case GridChannel::AbsError: return "abs_error";
    case GridChannel::GradError: return "grad_error";
  }
  return "?";
}

inline GridChannel parse_grid_channel(const std::string& name) {
  if (name == "value") return GridChannel::Value;
  if (name == "grad_norm") return GridChannel::GradNorm;
  if (name == "abs_error") return GridChannel::AbsError;
  if (name == "grad_error") return GridChannel::GradError;
  throw ConfigError("unknown snapshot channel: " + name);
}

/// A two-dimensional slice through the solution: (x1, x2) sweep the given
/// ranges, the remaining coordinates sit at fixed_value, time at t.
struct GridRequest {
  GridChannel channel = GridChannel::Value;
  int resolution = 101;
  double x1_min = 0.0, x1_max = 1.0;
  double x2_min = 0.0, x2_max = 1.0;
  double fixed_value = 0.0;
  double t = 0.0;
};

struct GridSnapshot {
  GridRequest request;
  int n = 0;
  Matrix values;  // resolution x resolution, row index sweeps x2, column x1
};

/// Evaluates the requested channel over the grid. Error channels use the
/// problem oracle with one shared sample set across all cells (common random
/// numbers), so the error field is smooth rather than re-noised per cell.
inline GridSnapshot grid_snapshot(const MlpParams& net, const ProblemSpec& problem,
                                  const GridRequest& req, int oracle_mc_samples,
                                  std::uint64_t seed, const ExecPolicy& exec = {}) {
  if (req.resolution < 2) throw ConfigError("grid_snapshot: resolution must be >= 2");
  if (net.spatial_dim() != problem.n || problem.n < 2) {
    throw ConfigError("grid_snapshot: needs n >= 2 and a matching network");
  }
  const bool needs_oracle =
      req.channel == GridChannel::AbsError || req.channel == GridChannel::GradError;
  if (needs_oracle && !problem.has_exact_solution()) {
    throw ConfigError("grid_snapshot: channel needs an exact-solution oracle");
  }
  Matrix shared_samples;
  if (needs_oracle && problem.kind == ProblemKind::Lqg && req.t < problem.T) {
    const long pairs = std::max(1, oracle_mc_samples / 2);
    RngStream stream(seed, "grid-oracle");
    shared_samples.resize(pairs, problem.n);
    for (long j = 0; j < pairs; ++j) {
      for (int i = 0; i < problem.n; ++i) shared_samples(j, i) = stream.gaussian();
    }
  }
  GridSnapshot snap;
  snap.request = req;
  snap.n = problem.n;
  const int R = req.resolution;
  snap.values.resize(R, R);
  parallel_for(static_cast<std::size_t>(R) * R, exec, [&](std::size_t cell) {
    const int row = static_cast<int>(cell / R);   // x2 index
    const int col = static_cast<int>(cell % R);   // x1 index
    Vector x = Vector::Constant(problem.n, req.fixed_value);
    x(0) = req.x1_min + (req.x1_max - req.x1_min) * col / (R - 1);
    x(1) = req.x2_min + (req.x2_max - req.x2_min) * row / (R - 1);
    double out = 0.0;
    switch (req.channel) {
      case GridChannel::Value:
        out = forward_jet(net, x, req.t).value;
        break;
      case GridChannel::GradNorm:
        out = forward_jet(net, x, req.t).spatial_grad.norm();
        break;
      case GridChannel::AbsError: {
        OracleValue ref = problem.kind == ProblemKind::Lqg
                              ? lqg_exact_with_samples(x, req.t, problem, shared_samples)
                              : power_hjb_exact(x, req.t, problem);
        out = std::abs(forward_jet(net, x, req.t).value - ref.value);
        break;
      }
      case GridChannel::GradError: {
        OracleValue ref = problem.kind == ProblemKind::Lqg
                              ? lqg_exact_with_samples(x, req.t, problem, shared_samples)
                              : power_hjb_exact(x, req.t, problem);
        out = (forward_jet(net, x, req.t).spatial_grad - ref.spatial_grad).norm();
        break;
      }
    }
    snap.values(row, col) = out;
  });
  return snap;
}

/// CSV serialization: '#' header lines carry the axis metadata, then the
/// row-major value matrix (one grid row per line).
inline void write_grid_csv(const GridSnapshot& snap, std::ostream& out) {
  const auto& r = snap.request;
  char buf[256];
  out << "# channel," << grid_channel_name(r.channel) << "\n";
  std::snprintf(buf, sizeof(buf), "# x1,%.17g,%.17g,%d\n", r.x1_min, r.x1_max, r.resolution);
  out << buf;
  std::snprintf(buf, sizeof(buf), "# x2,%.17g,%.17g,%d\n", r.x2_min, r.x2_max, r.resolution);
  out << buf;
  std::snprintf(buf, sizeof(buf), "# t,%.17g\n", r.t);
  out << buf;
  std::snprintf(buf, sizeof(buf), "# fixed_coords,%.17g,%d\n", r.fixed_value, snap.n - 2);
  out << buf;
  for (int row = 0; row < snap.values.rows(); ++row) {
    for (int col = 0; col < snap.values.cols(); ++col) {
      std::snprintf(buf, sizeof(buf), "%.17g", snap.values(row, col));
      out << buf << (col + 1 < snap.values.cols() ? "," : "\n");
    }
  }
}

}  // namespace hjb
