// Experiment front door: train / evaluate / snapshot / check over JSON run
// configs or named presets. See README.md for the workflows.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hjb/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::string threads = "1";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* config = cmd->add_option("--config", args.config_path, "run config JSON file");
  auto* preset = cmd->add_option("--preset", args.preset, "named preset");
  if (needs_config) {
    config->excludes(preset);
  }
  cmd->add_option("--set", args.overrides, "override, e.g. --set train.M=100")
      ->take_all();
  cmd->add_option("--seed", args.seed, "training/eval seed override");
  cmd->add_option("--threads", args.threads, "worker threads (integer or 'single')");
  cmd->add_option("--out", args.out_dir, "output directory");
}

hjb::RunConfig resolve_config(const CommonArgs& args) {
  if (args.config_path.empty() && args.preset.empty()) {
    throw hjb::ConfigError("need --config PATH or --preset NAME");
  }
  hjb::RunConfig cfg = args.config_path.empty() ? hjb::preset_config(args.preset)
                                                : hjb::load_config_file(args.config_path);
  return hjb::apply_overrides(cfg, args.overrides);
}

hjb::CliOptions resolve_options(const CommonArgs& args) {
  hjb::CliOptions opt;
  opt.out_dir = args.out_dir;
  opt.seed = args.seed;
  if (args.threads == "single") {
    opt.threads = 1;
  } else if (args.threads == "auto") {
    opt.threads = hjb::ExecPolicy::hardware().threads;
  } else {
    try {
      opt.threads = std::stoi(args.threads);
    } catch (...) {
      throw hjb::ConfigError("--threads must be an integer, 'single', or 'auto'");
    }
    if (opt.threads < 1) throw hjb::ConfigError("--threads must be >= 1");
  }
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial training harness for HJB physics-informed networks"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, snap_args;
  std::string eval_checkpoint, snap_checkpoint, snap_channel = "value", snap_out;

  auto* train_cmd = app.add_subcommand("train", "train a network per the config");
  add_common(train_cmd, train_args);

  auto* eval_cmd = app.add_subcommand("evaluate", "relative errors of a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  add_common(eval_cmd, eval_args);

  auto* snap_cmd = app.add_subcommand("snapshot", "write a 2-d solution slice CSV");
  snap_cmd->add_option("--checkpoint", snap_checkpoint, "checkpoint file")->required();
  snap_cmd->add_option("--channel", snap_channel,
                       "value | grad_norm | abs_error | grad_error");
  snap_cmd->add_option("--out-csv", snap_out, "output CSV path")->required();
  add_common(snap_cmd, snap_args);

  auto* check_cmd = app.add_subcommand("check", "run the built-in verification suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      return hjb::cmd_train(resolve_config(train_args), resolve_options(train_args),
                            std::cout);
    }
    if (eval_cmd->parsed()) {
      return hjb::cmd_evaluate(eval_checkpoint, resolve_config(eval_args),
                               resolve_options(eval_args), std::cout);
    }
    if (snap_cmd->parsed()) {
      return hjb::cmd_snapshot(snap_checkpoint, resolve_config(snap_args),
                               hjb::parse_grid_channel(snap_channel), snap_out,
                               resolve_options(snap_args), std::cout);
    }
    if (check_cmd->parsed()) {
      return hjb::cmd_check(std::cout);
    }
  } catch (const hjb::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const hjb::DivergenceError& e) {
    std::fprintf(stderr, "runtime abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
