#pragma once

#include <vector>

#include "hjb/jet.hpp"
#include "hjb/rng.hpp"

namespace hjb {

/// One training mini-batch: N1 domain points (x, t) and N2 boundary points x
/// with implicit t = T.
struct CollocationBatch {
  std::vector<PointSample> domain;
  std::vector<Vector> boundary;
};

/// Online sampling: (x, t) ~ N(0, I_n) x U(0, T) for the domain,
/// x ~ N(0, I_n) on the boundary. Deterministic per stream key.
inline CollocationBatch sample_batch(int n, double T, int N1, int N2, RngStream& stream) {
  CollocationBatch batch;
  batch.domain.resize(N1);
  for (int k = 0; k < N1; ++k) {
    batch.domain[k].x.resize(n);
    for (int i = 0; i < n; ++i) batch.domain[k].x(i) = stream.gaussian();
    batch.domain[k].t = stream.uniform(0.0, T);
  }
  batch.boundary.resize(N2);
  for (int k = 0; k < N2; ++k) {
    batch.boundary[k].resize(n);
    for (int i = 0; i < n; ++i) batch.boundary[k](i) = stream.gaussian();
  }
  return batch;
}

}  // namespace hjb
