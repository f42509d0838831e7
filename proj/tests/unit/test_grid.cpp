#include <doctest.h>

#include <sstream>

#include "hjb/grid.hpp"

using namespace hjb;

namespace {

MlpParams linear_solution_net(int n, double T) {
  MlpParams net;
  net.layer_dims = {n + 1, 1};
  Matrix w = Matrix::Ones(1, n + 1);
  w(0, n) = -1.0;
  net.weights.push_back(w);
  net.biases.push_back(Vector::Constant(1, T));
  return net;
}

}  // namespace

TEST_CASE("value channel on the linear solution") {
  // n = 4, others fixed at 1, t = 0, T = 1: cell (x1, x2) holds x1 + x2 + 2 + 1
  auto spec = ProblemSpec::power_hjb_linear(4, 1.0, 1.5);
  auto net = linear_solution_net(4, 1.0);
  GridRequest req;
  req.channel = GridChannel::Value;
  req.resolution = 11;
  req.fixed_value = 1.0;
  req.t = 0.0;
  auto snap = grid_snapshot(net, spec, req, 100, 0);
  REQUIRE(snap.values.rows() == 11);
  REQUIRE(snap.values.cols() == 11);
  for (int row = 0; row < 11; ++row) {
    for (int col = 0; col < 11; ++col) {
      const double x1 = col / 10.0, x2 = row / 10.0;
      CHECK(snap.values(row, col) == doctest::Approx(x1 + x2 + 2.0 + 1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("abs_error channel vanishes when the network is the oracle") {
  auto spec = ProblemSpec::power_hjb_linear(4, 1.0, 1.25);
  auto net = linear_solution_net(4, 1.0);
  GridRequest req;
  req.channel = GridChannel::AbsError;
  req.resolution = 7;
  req.fixed_value = 1.0;
  auto snap = grid_snapshot(net, spec, req, 100, 0);
  CHECK(snap.values.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("grad_norm channel is sqrt(n) for the all-ones gradient") {
  auto spec = ProblemSpec::power_hjb_linear(5, 1.0, 1.5);
  auto net = linear_solution_net(5, 1.0);
  GridRequest req;
  req.channel = GridChannel::GradNorm;
  req.resolution = 5;
  req.fixed_value = 1.0;
  auto snap = grid_snapshot(net, spec, req, 100, 0);
  for (int row = 0; row < 5; ++row) {
    for (int col = 0; col < 5; ++col) {
      CHECK(snap.values(row, col) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("lqg error channels share oracle samples across cells") {
  auto spec = ProblemSpec::lqg(3, 1.0, 1.0);
  auto net = linear_solution_net(3, 1.0);  // wrong solution; error field nonzero
  GridRequest req;
  req.channel = GridChannel::AbsError;
  req.resolution = 4;
  req.t = 0.5;
  auto a = grid_snapshot(net, spec, req, 2000, 42);
  auto b = grid_snapshot(net, spec, req, 2000, 42, ExecPolicy{3});
  CHECK(a.values == b.values);  // same seed, any thread count
  CHECK(a.values.minCoeff() > 0.0);
}

TEST_CASE("error channel without an oracle is rejected") {
  auto spec = ProblemSpec::power_hjb(3, 1.0, 1.0, Vector::Constant(3, 0.4),
                                     Vector::Constant(3, 1.5), 0.0,
                                     TerminalKind::CoordinateSum);
  auto net = linear_solution_net(3, 1.0);
  GridRequest req;
  req.channel = GridChannel::AbsError;
  CHECK_THROWS_AS(grid_snapshot(net, spec, req, 100, 0), ConfigError);
  req.channel = GridChannel::Value;
  req.resolution = 1;
  CHECK_THROWS_AS(grid_snapshot(net, spec, req, 100, 0), ConfigError);
}

TEST_CASE("grid CSV layout") {
  auto spec = ProblemSpec::power_hjb_linear(4, 1.0, 1.5);
  auto net = linear_solution_net(4, 1.0);
  GridRequest req;
  req.channel = GridChannel::Value;
  req.resolution = 3;
  req.fixed_value = 1.0;
  auto snap = grid_snapshot(net, spec, req, 100, 0);
  std::ostringstream out;
  write_grid_csv(snap, out);
  const std::string text = out.str();
  CHECK(text.find("# channel,value") == 0);
  CHECK(text.find("# x1,0,1,3") != std::string::npos);
  CHECK(text.find("# fixed_coords,1,2") != std::string::npos);
  // 5 header lines + 3 data rows, each with 3 comma-separated values
  int lines = 0;
  for (char ch : text) lines += (ch == '\n');
  CHECK(lines == 8);
}

TEST_CASE("channel names round-trip") {
  for (auto c : {GridChannel::Value, GridChannel::GradNorm, GridChannel::AbsError,
                 GridChannel::GradError}) {
    CHECK(parse_grid_channel(grid_channel_name(c)) == c);
  }
  CHECK_THROWS_AS(parse_grid_channel("nope"), ConfigError);
}
