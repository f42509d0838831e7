#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hjb {

/// SplitMix64 finalizer; used to derive stream keys from (seed, name, indices).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// A named, splittable random stream. The internal state is a pure function of
/// (seed, name, i0, i1), so the draws of one stream never depend on how many
/// values any other stream consumed. Streams keyed per point/iteration make
/// concurrent evaluation deterministic.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name, std::uint64_t i0 = 0,
            std::uint64_t i1 = 0)
      : engine_(derive_key(seed, name, i0, i1)) {}

  double uniform01() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double gaussian() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t derive_key(std::uint64_t seed, std::string_view name,
                                  std::uint64_t i0, std::uint64_t i1) {
    std::uint64_t s = mix64(seed);
    for (char ch : name) {
      s = mix64(s ^ static_cast<std::uint64_t>(static_cast<unsigned char>(ch)));
    }
    s = mix64(s ^ i0);
    s = mix64(s ^ i1);
    return s;
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hjb
