#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

// End-to-end checks of the installed binary: argument parsing and the
// documented exit codes (0 ok, 2 config error, 3 runtime abort, 4 check
// failure).

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(HJB_PINN_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("binary rejects unknown presets and keys with exit 2") {
  CHECK(run("train --preset lqg9000") == 2);
  CHECK(run("train --preset lqg10-desk --set train.etaa=0.1") == 2);
  CHECK(run("train") == 2);  // neither --config nor --preset
  CHECK(run("evaluate --checkpoint /nonexistent.bin --preset lqg10-desk") == 2);
}

TEST_CASE("binary trains a smoke config end to end") {
  const auto out = fs::temp_directory_path() / "hjb_bin_smoke";
  fs::remove_all(out);
  const int code = run(
      "train --preset hjb-c1.5-desk --set train.M=5 --set train.N1=4 --set train.N2=4 "
      "--set network.layer_dims=[11,12,12,1] --set eval.S=100 --threads single --out " +
      out.string());
  CHECK(code == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "trace.csv"));
  // evaluate the checkpoint it just wrote
  const int eval_code = run(
      "evaluate --checkpoint " + (out / "checkpoint_final.bin").string() +
      " --preset hjb-c1.5-desk --set network.layer_dims=[11,12,12,1] --set eval.S=100");
  CHECK(eval_code == 0);
  fs::remove_all(out);
}

TEST_CASE("binary snapshot writes a CSV and rejects bad channels") {
  const auto out = fs::temp_directory_path() / "hjb_bin_snap";
  fs::remove_all(out);
  fs::create_directories(out);
  REQUIRE(run("train --preset hjb-c1.5-desk --set train.M=2 --set train.N1=4 "
              "--set train.N2=4 --set network.layer_dims=[11,12,12,1] --set eval.S=0 "
              "--out " + out.string()) == 0);
  const std::string ckpt = (out / "checkpoint_final.bin").string();
  CHECK(run("snapshot --checkpoint " + ckpt +
            " --preset hjb-c1.5-desk --set network.layer_dims=[11,12,12,1] "
            "--set eval.grid.resolution=5 --channel value --out-csv " +
            (out / "g.csv").string()) == 0);
  CHECK(fs::exists(out / "g.csv"));
  CHECK(run("snapshot --checkpoint " + ckpt +
            " --preset hjb-c1.5-desk --set network.layer_dims=[11,12,12,1] "
            "--channel bogus --out-csv " + (out / "g2.csv").string()) == 2);
  fs::remove_all(out);
}

TEST_CASE("binary check subcommand passes in a bare environment") {
  CHECK(run("check") == 0);
}
