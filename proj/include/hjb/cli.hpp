#pragma once

// Library-level implementations of the CLI subcommands. main() stays a thin
// argv adapter so everything here is exercised directly by tests.
// Exit codes: 0 ok, 2 config error, 3 runtime abort, 4 check failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "hjb/config.hpp"
#include "hjb/grid.hpp"
#include "hjb/manifest.hpp"
#include "hjb/selfcheck.hpp"
#include "hjb/train.hpp"

namespace hjb {

struct CliOptions {
  std::optional<std::string> out_dir;        // --out
  std::optional<std::uint64_t> seed;         // --seed
  int threads = 1;                           // --threads (1 == "single")
};

namespace clidetail {

inline std::filesystem::path resolve_out_dir(const RunConfig& cfg, const CliOptions& opt) {
  if (opt.out_dir) return *opt.out_dir;
  std::filesystem::path dir = cfg.io.out_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("HJB_PINN_OUT_ROOT")) {
      return std::filesystem::path(root) / dir;
    }
  }
  return dir;
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace: " + path.string());
  out << "iter,domain_loss,boundary_loss,lr,post_attack_residual_sq\n";
  char line[256];
  for (const auto& row : trace) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", row.iter,
                  row.domain_loss, row.boundary_loss, row.lr, row.post_attack_residual_sq);
    out << line;
  }
}

inline EvalSettings eval_settings(const RunConfig& cfg) {
  EvalSettings ev;
  ev.S = cfg.eval.S;
  ev.oracle_mc_samples = cfg.eval.oracle_mc_samples;
  ev.seed = cfg.eval.seed;
  return ev;
}

inline std::string metrics_percent_line(const MetricsRecord& m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "L1 %.2f%%  L2 %.2f%%  W1,1 %.2f%%", 100.0 * m.l1_rel,
                100.0 * m.l2_rel, 100.0 * m.w11_rel);
  return buf;
}

}  // namespace clidetail

/// Trains per the config; writes trace.csv, checkpoints, and manifest.json
/// (atomically, at run end) into the output directory.
inline int cmd_train(RunConfig cfg, const CliOptions& opt, std::ostream& log) {
  if (opt.seed) {
    cfg.train.seed = *opt.seed;
    validate_config(cfg);
  }
  const auto out_dir = clidetail::resolve_out_dir(cfg, opt);
  std::filesystem::create_directories(out_dir);
  ProblemSpec problem = make_problem(cfg.problem);
  MlpParams net = init_network(cfg.network.layer_dims, cfg.train.seed);

  RunManifest manifest;
  manifest.config_echo = config_to_json(cfg);
  manifest.config_hash = config_hash(cfg);
  manifest.seed = cfg.train.seed;
  manifest.started_at = iso8601_utc_now();
  manifest.threads = opt.threads;

  TrainHooks hooks;
  hooks.checkpoint_interval = cfg.io.checkpoint_interval;
  if (hooks.checkpoint_interval > 0) {
    hooks.on_checkpoint = [&](int iter, const MlpParams& params) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_iter%06d.bin", iter);
      const auto path = out_dir / name;
      save_checkpoint(path, params);
      manifest.checkpoint_paths.push_back(path.string());
    };
  }

  RunRecord rec =
      train(problem, cfg.train, net, clidetail::eval_settings(cfg), ExecPolicy{opt.threads}, hooks);

  const auto trace_path = out_dir / "trace.csv";
  clidetail::write_trace_csv(trace_path, rec.trace);
  const auto final_path = out_dir / "checkpoint_final.bin";
  save_checkpoint(final_path, net);
  manifest.checkpoint_paths.push_back(final_path.string());
  manifest.trace_path = trace_path.string();
  manifest.metrics = rec.metrics;
  manifest.abort_reason = rec.abort_reason;
  manifest.attack_faults = rec.attack_faults;
  manifest.wall_seconds = rec.wall_seconds;
  manifest.finished_at = iso8601_utc_now();
  write_json_atomic(out_dir / "manifest.json", manifest.to_json());

  if (rec.aborted()) {
    log << "run aborted: " << rec.abort_reason << "\n";
    return 3;
  }
  log << "trained " << rec.trace.size() << " iterations in " << rec.wall_seconds << " s\n";
  if (rec.metrics) log << clidetail::metrics_percent_line(*rec.metrics) << "\n";
  log << "artifacts in " << out_dir.string() << "\n";
  return 0;
}

/// Evaluates a checkpoint against the problem oracle; prints the three
/// relative errors as percentages and logs them into the run manifest next to
/// the checkpoint (or evaluations.jsonl when there is none).
inline int cmd_evaluate(const std::filesystem::path& checkpoint, const RunConfig& cfg,
                        const CliOptions& opt, std::ostream& log) {
  MlpParams net = load_checkpoint(checkpoint);
  ProblemSpec problem = make_problem(cfg.problem);
  if (net.layer_dims != cfg.network.layer_dims) {
    throw ConfigError("checkpoint shape does not match config network.layer_dims");
  }
  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.eval.seed;
  MetricsRecord m = relative_errors(net, problem, cfg.eval.S, seed,
                                    cfg.eval.oracle_mc_samples, ExecPolicy{opt.threads});
  log << clidetail::metrics_percent_line(m) << "\n";

  json entry = {{"checkpoint", checkpoint.string()},
                {"at", iso8601_utc_now()},
                {"S", m.samples_S},
                {"seed", m.seed},
                {"oracle_mc_samples", cfg.eval.oracle_mc_samples},
                {"l1_rel", m.l1_rel},
                {"l2_rel", m.l2_rel},
                {"w11_rel", m.w11_rel}};
  const auto manifest_path = checkpoint.parent_path() / "manifest.json";
  if (auto mj = read_json_file(manifest_path)) {
    if (!mj->contains("evaluations") || !(*mj)["evaluations"].is_array()) {
      (*mj)["evaluations"] = json::array();
    }
    (*mj)["evaluations"].push_back(entry);
    write_json_atomic(manifest_path, *mj);
  } else {
    std::ofstream side(checkpoint.parent_path() / "evaluations.jsonl", std::ios::app);
    side << entry.dump() << "\n";
  }
  return 0;
}

/// Writes one grid-snapshot CSV for the requested channel.
inline int cmd_snapshot(const std::filesystem::path& checkpoint, const RunConfig& cfg,
                        GridChannel channel, const std::filesystem::path& out_csv,
                        const CliOptions& opt, std::ostream& log) {
  MlpParams net = load_checkpoint(checkpoint);
  ProblemSpec problem = make_problem(cfg.problem);
  if (net.layer_dims != cfg.network.layer_dims) {
    throw ConfigError("checkpoint shape does not match config network.layer_dims");
  }
  GridRequest req = cfg.eval.grid;
  req.channel = channel;
  GridSnapshot snap = grid_snapshot(net, problem, req, cfg.eval.oracle_mc_samples,
                                    opt.seed ? *opt.seed : cfg.eval.seed,
                                    ExecPolicy{opt.threads});
  std::ofstream out(out_csv);
  if (!out) throw ConfigError("cannot write snapshot: " + out_csv.string());
  write_grid_csv(snap, out);
  log << "wrote " << req.resolution << "x" << req.resolution << " "
      << grid_channel_name(channel) << " grid to " << out_csv.string() << "\n";
  return 0;
}

/// Runs the built-in verification suites; prints one line per suite.
inline int cmd_check(std::ostream& log) {
  auto results = selfcheck::run_all();
  bool all_pass = true;
  for (const auto& r : results) {
    log << (r.pass ? "[ pass ] " : "[ FAIL ] ") << r.name << "  (" << r.detail << ")\n";
    all_pass = all_pass && r.pass;
  }
  log << (all_pass ? "all checks passed\n" : "CHECK FAILURES\n");
  return all_pass ? 0 : 4;
}

}  // namespace hjb
