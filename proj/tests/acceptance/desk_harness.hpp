#pragma once

// Desk-scale experiment arms shared by the acceptance suite and the run
// preparer: the n = 10 LQG problem, a width-256 network, and the five
// training configurations under comparison. Finished runs are cached on disk
// keyed by (arm, seed) so reruns and the acceptance binary reuse them.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hjb/train.hpp"

namespace desk {

using nlohmann::json;

inline hjb::ProblemSpec problem() { return hjb::ProblemSpec::lqg(10, 1.0, 1.0); }

inline std::vector<int> layer_dims() { return {11, 256, 256, 256, 1}; }

inline hjb::EvalSettings eval_settings() {
  hjb::EvalSettings ev;
  ev.S = 10000;
  ev.oracle_mc_samples = 10000;
  ev.seed = 424242;  // shared across arms: comparisons see the same draws
  return ev;
}

/// The five arms: adversarial and its K/eta ablations, the plain squared-loss
/// baseline, and the direct |r|^16 loss.
inline hjb::TrainConfig arm_config(const std::string& arm, std::uint64_t seed, int M = 2000) {
  hjb::TrainConfig cfg;
  cfg.M = M;
  cfg.N1 = 100;
  cfg.N2 = 100;
  cfg.lr0 = 7e-4;
  cfg.lambda = 1.0;
  cfg.seed = seed;
  cfg.t_max = 1.0;
  if (arm == "adv") {
    cfg.loss_mode = hjb::LossMode::Adversarial;
    cfg.K = 20;
    cfg.eta = 0.05;
  } else if (arm == "l2") {
    cfg.loss_mode = hjb::LossMode::L2;
    cfg.K = 0;
  } else if (arm == "k5e2") {
    cfg.loss_mode = hjb::LossMode::Adversarial;
    cfg.K = 5;
    cfg.eta = 0.2;
  } else if (arm == "k20e2") {
    cfg.loss_mode = hjb::LossMode::Adversarial;
    cfg.K = 20;
    cfg.eta = 0.2;
  } else if (arm == "lp16") {
    cfg.loss_mode = hjb::LossMode::Lp;
    cfg.lp_p = 16.0;
    cfg.K = 0;
    cfg.attack_domain = false;
    cfg.attack_boundary = false;
  } else {
    throw hjb::ConfigError("unknown desk arm: " + arm);
  }
  return cfg;
}

struct ArmResult {
  std::string arm;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string abort_reason;
  std::optional<hjb::MetricsRecord> metrics;
  double wall_seconds = 0.0;
  int attack_faults = 0;
};

inline std::filesystem::path entry_dir(const std::filesystem::path& cache, const std::string& arm,
                                       std::uint64_t seed) {
  return cache / (arm + "-s" + std::to_string(seed));
}

inline std::optional<ArmResult> load_result(const std::filesystem::path& cache,
                                            const std::string& arm, std::uint64_t seed) {
  auto path = entry_dir(cache, arm, seed) / "record.json";
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  ArmResult r;
  r.arm = arm;
  r.seed = seed;
  r.aborted = j.value("aborted", false);
  r.abort_reason = j.value("abort_reason", "");
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.attack_faults = j.value("attack_faults", 0);
  if (j.contains("metrics")) {
    hjb::MetricsRecord m;
    m.l1_rel = j["metrics"]["l1_rel"];
    m.l2_rel = j["metrics"]["l2_rel"];
    m.w11_rel = j["metrics"]["w11_rel"];
    m.samples_S = j["metrics"]["samples_S"];
    m.seed = j["metrics"]["seed"];
    r.metrics = m;
  }
  return r;
}

inline void save_result(const std::filesystem::path& cache, const ArmResult& r,
                        const hjb::RunRecord& rec, const hjb::MlpParams& net) {
  auto dir = entry_dir(cache, r.arm, r.seed);
  std::filesystem::create_directories(dir);
  hjb::save_checkpoint(dir / "checkpoint.bin", net);
  {
    std::ofstream trace(dir / "trace.csv");
    trace << "iter,domain_loss,boundary_loss,lr,post_attack_residual_sq\n";
    char line[256];
    for (const auto& row : rec.trace) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", row.iter,
                    row.domain_loss, row.boundary_loss, row.lr,
                    row.post_attack_residual_sq);
      trace << line;
    }
  }
  json j;
  j["arm"] = r.arm;
  j["seed"] = r.seed;
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["wall_seconds"] = r.wall_seconds;
  j["attack_faults"] = r.attack_faults;
  if (r.metrics) {
    j["metrics"] = {{"l1_rel", r.metrics->l1_rel},
                    {"l2_rel", r.metrics->l2_rel},
                    {"w11_rel", r.metrics->w11_rel},
                    {"samples_S", r.metrics->samples_S},
                    {"seed", r.metrics->seed}};
  }
  std::ofstream out(dir / "record.json");
  out << j.dump(2) << "\n";
}

/// Returns the cached result or trains the arm (single-threaded unless told
/// otherwise) and caches it.
inline ArmResult run_or_load(const std::filesystem::path& cache, const std::string& arm,
                             std::uint64_t seed, int M = 2000, int threads = 1) {
  if (auto hit = load_result(cache, arm, seed)) return *hit;
  auto spec = problem();
  auto net = hjb::init_network(layer_dims(), seed);
  auto cfg = arm_config(arm, seed, M);
  auto rec = hjb::train(spec, cfg, net, eval_settings(), hjb::ExecPolicy{threads});
  ArmResult r;
  r.arm = arm;
  r.seed = seed;
  r.aborted = rec.aborted();
  r.abort_reason = rec.abort_reason;
  r.metrics = rec.metrics;
  r.wall_seconds = rec.wall_seconds;
  r.attack_faults = rec.attack_faults;
  save_result(cache, r, rec, net);
  return r;
}

}  // namespace desk
