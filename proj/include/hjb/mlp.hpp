#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/rng.hpp"

namespace hjb {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { Tanh };

/// Fully-connected network over inputs (x_1..x_n, t). Hidden layers apply the
/// activation elementwise; the final layer is linear and maps to a scalar.
struct MlpParams {
  std::vector<int> layer_dims;   // [input_dim, hidden..., 1]
  std::vector<Matrix> weights;   // weights[k]: layer_dims[k+1] x layer_dims[k]
  std::vector<Vector> biases;    // biases[k]: layer_dims[k+1]
  Activation activation = Activation::Tanh;

  int input_dim() const { return layer_dims.front(); }
  int spatial_dim() const { return layer_dims.front() - 1; }
  int layer_count() const { return static_cast<int>(weights.size()); }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      total += static_cast<std::size_t>(weights[k].size()) +
               static_cast<std::size_t>(biases[k].size());
    }
    return total;
  }

  bool all_finite() const {
    for (const auto& w : weights) {
      if (!w.allFinite()) return false;
    }
    for (const auto& b : biases) {
      if (!b.allFinite()) return false;
    }
    return true;
  }

  void validate() const {
    if (layer_dims.size() < 2) {
      throw ConfigError("network needs at least input and output dims");
    }
    for (int d : layer_dims) {
      if (d <= 0) throw ConfigError("network layer_dims must all be positive");
    }
    if (layer_dims.front() < 2) {
      throw ConfigError("network input dim must be >= 2 (spatial dims + time)");
    }
    if (layer_dims.back() != 1) {
      throw ConfigError("network output dim must be 1");
    }
    if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size()) {
      throw ConfigError("network layer count does not match layer_dims");
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].rows() != layer_dims[k + 1] || weights[k].cols() != layer_dims[k] ||
          biases[k].size() != layer_dims[k + 1]) {
        throw ConfigError("network weight shapes do not chain with layer_dims");
      }
    }
    if (!all_finite()) throw ConfigError("network parameters contain NaN/Inf");
  }
};

/// Glorot-uniform weights, zero biases. Deterministic given the seed.
inline MlpParams init_network(const std::vector<int>& layer_dims, std::uint64_t seed) {
  MlpParams net;
  net.layer_dims = layer_dims;
  net.weights.reserve(layer_dims.size() - 1);
  net.biases.reserve(layer_dims.size() - 1);
  if (layer_dims.size() < 2) throw ConfigError("layer_dims needs at least 2 entries");
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    int fan_in = layer_dims[k];
    int fan_out = layer_dims[k + 1];
    if (fan_in <= 0 || fan_out <= 0) throw ConfigError("layer_dims must be positive");
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    RngStream stream(seed, "init", k);
    Matrix w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = stream.uniform(-bound, bound);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  net.validate();
  return net;
}

/// Gradient (or any other tangent) with the same shapes as the parameters.
struct ParamGrad {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static ParamGrad zero_like(const MlpParams& net) {
    ParamGrad g;
    g.weights.reserve(net.weights.size());
    g.biases.reserve(net.biases.size());
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      g.weights.push_back(Matrix::Zero(net.weights[k].rows(), net.weights[k].cols()));
      g.biases.push_back(Vector::Zero(net.biases[k].size()));
    }
    return g;
  }

  void add_scaled(const ParamGrad& other, double scale) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      weights[k] += scale * other.weights[k];
      biases[k] += scale * other.biases[k];
    }
  }

  void scale(double s) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      weights[k] *= s;
      biases[k] *= s;
    }
  }

  double sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      m = std::max(m, weights[k].cwiseAbs().maxCoeff());
      if (biases[k].size() > 0) m = std::max(m, biases[k].cwiseAbs().maxCoeff());
    }
    return m;
  }

  bool all_finite() const {
    for (const auto& w : weights) {
      if (!w.allFinite()) return false;
    }
    for (const auto& b : biases) {
      if (!b.allFinite()) return false;
    }
    return true;
  }
};

// --- checkpoint format -------------------------------------------------------
//
// Flat binary, little-endian:
//   magic "HJBN" (4 bytes), u32 version (1), u8 activation tag,
//   u32 layer_dims count, i32 layer_dims[],
//   then per weight layer: row-major f64 weights, f64 biases.
// Round-trips are bit exact.

namespace detail {
template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("checkpoint truncated");
  return v;
}
}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const MlpParams& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open checkpoint for writing: " + path.string());
  out.write("HJBN", 4);
  detail::write_pod<std::uint32_t>(out, 1);
  detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(net.activation));
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_dims.size()));
  for (int d : net.layer_dims) detail::write_pod<std::int32_t>(out, d);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    out.write(reinterpret_cast<const char*>(net.weights[k].data()),
              static_cast<std::streamsize>(sizeof(double) * net.weights[k].size()));
    out.write(reinterpret_cast<const char*>(net.biases[k].data()),
              static_cast<std::streamsize>(sizeof(double) * net.biases[k].size()));
  }
  if (!out) throw ConfigError("checkpoint write failed: " + path.string());
}

inline MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HJBN", 4) != 0) {
    throw ConfigError("not a checkpoint file: " + path.string());
  }
  auto version = detail::read_pod<std::uint32_t>(in);
  if (version != 1) throw ConfigError("unsupported checkpoint version");
  auto act = detail::read_pod<std::uint8_t>(in);
  if (act != 0) throw ConfigError("unsupported activation tag in checkpoint");
  auto dims = detail::read_pod<std::uint32_t>(in);
  MlpParams net;
  net.activation = Activation::Tanh;
  net.layer_dims.resize(dims);
  for (auto& d : net.layer_dims) d = detail::read_pod<std::int32_t>(in);
  for (std::size_t k = 0; k + 1 < net.layer_dims.size(); ++k) {
    Matrix w(net.layer_dims[k + 1], net.layer_dims[k]);
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(sizeof(double) * w.size()));
    Vector b(net.layer_dims[k + 1]);
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(sizeof(double) * b.size()));
    if (!in) throw ConfigError("checkpoint truncated: " + path.string());
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  net.validate();
  return net;
}

}  // namespace hjb
