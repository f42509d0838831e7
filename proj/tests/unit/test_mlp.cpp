#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "hjb/mlp.hpp"

using namespace hjb;

TEST_CASE("init_network is deterministic and bounded") {
  auto a = init_network({3, 4, 1}, 7);
  auto b = init_network({3, 4, 1}, 7);
  REQUIRE(a.weights.size() == 2);
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    CHECK(a.weights[k] == b.weights[k]);  // bitwise
    CHECK(a.biases[k] == b.biases[k]);
  }
  // biases are exactly zero
  for (const auto& bias : a.biases) {
    CHECK(bias.cwiseAbs().maxCoeff() == 0.0);
  }
  // Glorot bound per layer
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    const double bound =
        std::sqrt(6.0 / (a.layer_dims[k] + a.layer_dims[k + 1]));
    CHECK(a.weights[k].cwiseAbs().maxCoeff() <= bound);
  }
  auto c = init_network({3, 4, 1}, 8);
  CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("init_network rejects bad dimension lists") {
  CHECK_THROWS_AS(init_network({3, 0, 1}, 1), ConfigError);
  CHECK_THROWS_AS(init_network({3, 4, 2}, 1), ConfigError);  // output dim != 1
  CHECK_THROWS_AS(init_network({1, 4, 1}, 1), ConfigError);  // input dim < 2
  CHECK_THROWS_AS(init_network({3}, 1), ConfigError);
}

TEST_CASE("validate catches shape mismatches") {
  auto net = init_network({3, 4, 1}, 7);
  net.weights[0].resize(4, 2);
  CHECK_THROWS_AS(net.validate(), ConfigError);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  auto net = init_network({4, 6, 5, 1}, 99);
  net.biases[1](2) = 0.1234567890123456789;
  auto path = std::filesystem::temp_directory_path() / "hjb_ckpt_test.bin";
  save_checkpoint(path, net);
  auto back = load_checkpoint(path);
  REQUIRE(back.layer_dims == net.layer_dims);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    CHECK(back.weights[k] == net.weights[k]);
    CHECK(back.biases[k] == net.biases[k]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load_checkpoint rejects garbage") {
  auto path = std::filesystem::temp_directory_path() / "hjb_ckpt_garbage.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  std::filesystem::remove(path);
}
