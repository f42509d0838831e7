#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjb/cli.hpp"

using namespace hjb;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig smoke_config() {
  auto cfg = preset_config("hjb-c1.5-desk");
  cfg = apply_override(cfg, "train.M=10");
  cfg = apply_override(cfg, "train.N1=6");
  cfg = apply_override(cfg, "train.N2=6");
  cfg = apply_override(cfg, "network.layer_dims=[11,16,16,1]");
  cfg = apply_override(cfg, "eval.S=300");
  return cfg;
}

}  // namespace

TEST_CASE("cmd_train writes manifest, trace, and checkpoint") {
  auto out = fresh_dir("hjb_cli_train");
  CliOptions opt;
  opt.out_dir = out.string();
  std::ostringstream log;
  CHECK(cmd_train(smoke_config(), opt, log) == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "checkpoint_final.bin"));
  const std::string trace = slurp(out / "trace.csv");
  int lines = 0;
  for (char ch : trace) lines += (ch == '\n');
  CHECK(lines == 11);  // header + 10 rows
  auto manifest = read_json_file(out / "manifest.json");
  REQUIRE(manifest.has_value());
  CHECK((*manifest)["config_hash"].get<std::string>().size() == 40);
  CHECK((*manifest)["abort_reason"].is_null());
  CHECK((*manifest)["metrics"]["l1_rel"].is_number());
  fs::remove_all(out);
}

TEST_CASE("cmd_train is byte-deterministic in single-threaded mode") {
  auto out1 = fresh_dir("hjb_cli_det1");
  auto out2 = fresh_dir("hjb_cli_det2");
  auto cfg = smoke_config();
  CliOptions opt;
  opt.threads = 1;
  std::ostringstream log;
  opt.out_dir = out1.string();
  CHECK(cmd_train(cfg, opt, log) == 0);
  opt.out_dir = out2.string();
  CHECK(cmd_train(cfg, opt, log) == 0);
  CHECK(slurp(out1 / "trace.csv") == slurp(out2 / "trace.csv"));
  CHECK(slurp(out1 / "checkpoint_final.bin") == slurp(out2 / "checkpoint_final.bin"));
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("cmd_train honors checkpoint intervals and seed overrides") {
  auto out = fresh_dir("hjb_cli_ckpt");
  auto cfg = apply_override(smoke_config(), "io.checkpoint_interval=4");
  CliOptions opt;
  opt.out_dir = out.string();
  opt.seed = 9;
  std::ostringstream log;
  CHECK(cmd_train(cfg, opt, log) == 0);
  CHECK(fs::exists(out / "checkpoint_iter000004.bin"));
  CHECK(fs::exists(out / "checkpoint_iter000008.bin"));
  auto manifest = read_json_file(out / "manifest.json");
  CHECK((*manifest)["seed"] == 9);
  fs::remove_all(out);
}

TEST_CASE("cmd_evaluate prints the exact-solution zeros and logs them") {
  auto out = fresh_dir("hjb_cli_eval");
  // exact linear solution checkpoint
  MlpParams net;
  net.layer_dims = {11, 1};
  Matrix w = Matrix::Ones(1, 11);
  w(0, 10) = -1.0;
  net.weights.push_back(w);
  net.biases.push_back(Vector::Constant(1, 1.0));
  const auto ckpt = out / "checkpoint_final.bin";
  save_checkpoint(ckpt, net);

  auto cfg = preset_config("hjb-c1.5-desk");
  cfg = apply_override(cfg, "network.layer_dims=[11,1]");
  cfg = apply_override(cfg, "eval.S=400");
  CliOptions opt;
  std::ostringstream log;
  CHECK(cmd_evaluate(ckpt, cfg, opt, log) == 0);
  CHECK(log.str().find("L1 0.00%  L2 0.00%  W1,1 0.00%") != std::string::npos);
  CHECK(fs::exists(out / "evaluations.jsonl"));  // no manifest next to it
  fs::remove_all(out);
}

TEST_CASE("cmd_evaluate appends into an existing manifest") {
  auto out = fresh_dir("hjb_cli_eval_manifest");
  CliOptions opt;
  opt.out_dir = out.string();
  std::ostringstream log;
  auto cfg = smoke_config();
  CHECK(cmd_train(cfg, opt, log) == 0);
  CHECK(cmd_evaluate(out / "checkpoint_final.bin", cfg, opt, log) == 0);
  auto manifest = read_json_file(out / "manifest.json");
  REQUIRE(manifest.has_value());
  CHECK((*manifest)["evaluations"].size() == 1);
  CHECK((*manifest)["evaluations"][0]["l1_rel"].is_number());
  fs::remove_all(out);
}

TEST_CASE("cmd_evaluate rejects missing checkpoints and shape mismatches") {
  auto cfg = smoke_config();
  CliOptions opt;
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_evaluate("/nonexistent/ckpt.bin", cfg, opt, log), ConfigError);

  auto out = fresh_dir("hjb_cli_shape");
  auto net = init_network({11, 8, 1}, 0);  // does not match config dims
  const auto ckpt = out / "c.bin";
  save_checkpoint(ckpt, net);
  CHECK_THROWS_AS(cmd_evaluate(ckpt, cfg, opt, log), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("cmd_snapshot writes the grid CSV") {
  auto out = fresh_dir("hjb_cli_snap");
  MlpParams net;
  net.layer_dims = {11, 1};
  Matrix w = Matrix::Ones(1, 11);
  w(0, 10) = -1.0;
  net.weights.push_back(w);
  net.biases.push_back(Vector::Constant(1, 1.0));
  const auto ckpt = out / "c.bin";
  save_checkpoint(ckpt, net);
  auto cfg = preset_config("hjb-c1.5-desk");
  cfg = apply_override(cfg, "network.layer_dims=[11,1]");
  CliOptions opt;
  std::ostringstream log;
  const auto csv = out / "grid.csv";
  CHECK(cmd_snapshot(ckpt, cfg, GridChannel::Value, csv, opt, log) == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("# channel,value") == 0);
  int lines = 0;
  for (char ch : text) lines += (ch == '\n');
  CHECK(lines == 5 + 101);  // headers + one line per grid row
  CHECK_THROWS_AS(parse_grid_channel("bogus"), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("aborted runs exit 3 and keep the manifest") {
  auto out = fresh_dir("hjb_cli_abort");
  auto cfg = apply_overrides(
      smoke_config(),
      {"train.loss_mode=lp", "train.lp_p=16", "train.attack_domain=false",
       "train.attack_boundary=false", "train.lr0=1e300"});  // diverges immediately
  CliOptions opt;
  opt.out_dir = out.string();
  std::ostringstream log;
  CHECK(cmd_train(cfg, opt, log) == 3);
  auto manifest = read_json_file(out / "manifest.json");
  REQUIRE(manifest.has_value());
  CHECK((*manifest)["abort_reason"].is_string());
  fs::remove_all(out);
}
