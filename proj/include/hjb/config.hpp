#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/grid.hpp"
#include "hjb/problems.hpp"
#include "hjb/train_config.hpp"

namespace hjb {

using nlohmann::json;

struct ProblemConfig {
  std::string kind = "lqg";  // "lqg" | "power_hjb"
  int n = 100;
  double T = 1.0;
  double mu = 1.0;                                        // lqg
  double sigma = std::sqrt(2.0);                          // power_hjb
  std::variant<std::string, std::vector<double>> A = std::string("one_over_n");
  std::variant<double, std::vector<double>> c = 1.5;
  double phi = -2.0;                                      // constant forcing
  std::string terminal = "log_quadratic";                 // | "coordinate_sum"
};

struct NetworkConfig {
  std::vector<int> layer_dims;
};

struct EvalConfig {
  int S = 10000;
  int oracle_mc_samples = 10000;
  std::uint64_t seed = 424242;
  GridRequest grid;  // geometry defaults; channel chosen per snapshot command
};

struct IoConfig {
  std::string out_dir = "runs";
  int checkpoint_interval = 0;
};

struct RunConfig {
  ProblemConfig problem;
  NetworkConfig network;
  TrainConfig train;
  EvalConfig eval;
  IoConfig io;
};

namespace cfgdetail {

[[noreturn]] inline void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

inline void require_keys(const json& obj, const std::string& section,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  const std::string prefix = section.empty() ? "" : section + ".";
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key: " + prefix + it.key());
    }
  }
}

template <class T>
T get_or(const json& obj, const std::string& section, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(section + "." + key, "wrong type");
  }
}

}  // namespace cfgdetail

inline ProblemSpec make_problem(const ProblemConfig& pc) {
  if (pc.kind == "lqg") {
    return ProblemSpec::lqg(pc.n, pc.T, pc.mu);
  }
  if (pc.kind != "power_hjb") throw ConfigError("problem.kind must be lqg or power_hjb");
  Vector A(pc.n), c(pc.n);
  if (std::holds_alternative<std::string>(pc.A)) {
    const auto& mode = std::get<std::string>(pc.A);
    if (mode != "one_over_n") throw ConfigError("problem.A: unknown preset '" + mode + "'");
    A = Vector::Constant(pc.n, 1.0 / pc.n);
  } else {
    const auto& values = std::get<std::vector<double>>(pc.A);
    if (static_cast<int>(values.size()) != pc.n) {
      throw ConfigError("problem.A: needs exactly n entries");
    }
    for (int i = 0; i < pc.n; ++i) A(i) = values[i];
  }
  if (std::holds_alternative<double>(pc.c)) {
    c = Vector::Constant(pc.n, std::get<double>(pc.c));
  } else {
    const auto& values = std::get<std::vector<double>>(pc.c);
    if (static_cast<int>(values.size()) != pc.n) {
      throw ConfigError("problem.c: needs exactly n entries");
    }
    for (int i = 0; i < pc.n; ++i) c(i) = values[i];
  }
  TerminalKind terminal;
  if (pc.terminal == "log_quadratic") {
    terminal = TerminalKind::LogQuadratic;
  } else if (pc.terminal == "coordinate_sum") {
    terminal = TerminalKind::CoordinateSum;
  } else {
    throw ConfigError("problem.terminal must be log_quadratic or coordinate_sum");
  }
  return ProblemSpec::power_hjb(pc.n, pc.T, pc.sigma, std::move(A), std::move(c), pc.phi,
                                terminal);
}

// --- json round-trip -----------------------------------------------------------

inline json config_to_json(const RunConfig& cfg) {
  json j;
  json& p = j["problem"];
  p["kind"] = cfg.problem.kind;
  p["n"] = cfg.problem.n;
  p["T"] = cfg.problem.T;
  if (cfg.problem.kind == "lqg") {
    p["mu"] = cfg.problem.mu;
  } else {
    p["sigma"] = cfg.problem.sigma;
    if (std::holds_alternative<std::string>(cfg.problem.A)) {
      p["A"] = std::get<std::string>(cfg.problem.A);
    } else {
      p["A"] = std::get<std::vector<double>>(cfg.problem.A);
    }
    if (std::holds_alternative<double>(cfg.problem.c)) {
      p["c"] = std::get<double>(cfg.problem.c);
    } else {
      p["c"] = std::get<std::vector<double>>(cfg.problem.c);
    }
    p["phi"] = cfg.problem.phi;
    p["terminal"] = cfg.problem.terminal;
  }
  j["network"]["layer_dims"] = cfg.network.layer_dims;
  json& t = j["train"];
  t["M"] = cfg.train.M;
  t["K"] = cfg.train.K;
  t["eta"] = cfg.train.eta;
  t["lambda"] = cfg.train.lambda;
  t["N1"] = cfg.train.N1;
  t["N2"] = cfg.train.N2;
  t["lr0"] = cfg.train.lr0;
  t["lr_schedule"] = "linear_to_zero";
  t["adam_beta1"] = cfg.train.adam_beta1;
  t["adam_beta2"] = cfg.train.adam_beta2;
  t["adam_eps"] = cfg.train.adam_eps;
  t["seed"] = cfg.train.seed;
  t["loss_mode"] = loss_mode_name(cfg.train.loss_mode);
  if (cfg.train.loss_mode == LossMode::Lp) t["lp_p"] = cfg.train.lp_p;
  t["attack_domain"] = cfg.train.attack_domain;
  t["attack_boundary"] = cfg.train.attack_boundary;
  t["attack_time"] = cfg.train.attack_time;
  t["fd_step"] = cfg.train.fd_step;
  if (cfg.train.x_clamp_radius) {
    t["x_clamp_radius"] = *cfg.train.x_clamp_radius;
  } else {
    t["x_clamp_radius"] = nullptr;
  }
  json& e = j["eval"];
  e["S"] = cfg.eval.S;
  e["oracle_mc_samples"] = cfg.eval.oracle_mc_samples;
  e["seed"] = cfg.eval.seed;
  e["grid"] = {{"resolution", cfg.eval.grid.resolution}, {"x1_min", cfg.eval.grid.x1_min},
               {"x1_max", cfg.eval.grid.x1_max},         {"x2_min", cfg.eval.grid.x2_min},
               {"x2_max", cfg.eval.grid.x2_max},         {"fixed_value", cfg.eval.grid.fixed_value},
               {"t", cfg.eval.grid.t}};
  j["io"] = {{"out_dir", cfg.io.out_dir}, {"checkpoint_interval", cfg.io.checkpoint_interval}};
  return j;
}

inline RunConfig config_from_json(const json& j) {
  using cfgdetail::fail;
  using cfgdetail::get_or;
  using cfgdetail::require_keys;
  if (!j.is_object()) throw ConfigError("config root must be an object");
  require_keys(j, "", {"problem", "network", "train", "eval", "io"});
  for (const char* section : {"problem", "network", "train"}) {
    if (!j.contains(section)) {
      throw ConfigError(std::string("config is missing the '") + section + "' section");
    }
  }
  RunConfig cfg;

  const json& p = j.at("problem");
  require_keys(p, "problem", {"kind", "n", "T", "mu", "sigma", "A", "c", "phi", "terminal"});
  cfg.problem.kind = get_or<std::string>(p, "problem", "kind", "lqg");
  cfg.problem.n = get_or<int>(p, "problem", "n", 100);
  cfg.problem.T = get_or<double>(p, "problem", "T", 1.0);
  cfg.problem.mu = get_or<double>(p, "problem", "mu", 1.0);
  cfg.problem.sigma = get_or<double>(p, "problem", "sigma", std::sqrt(2.0));
  if (p.contains("A")) {
    if (p.at("A").is_string()) {
      cfg.problem.A = p.at("A").get<std::string>();
    } else if (p.at("A").is_array()) {
      cfg.problem.A = p.at("A").get<std::vector<double>>();
    } else {
      fail("problem.A", "must be a preset name or an array");
    }
  }
  if (p.contains("c")) {
    if (p.at("c").is_number()) {
      cfg.problem.c = p.at("c").get<double>();
    } else if (p.at("c").is_array()) {
      cfg.problem.c = p.at("c").get<std::vector<double>>();
    } else {
      fail("problem.c", "must be a number or an array");
    }
  }
  cfg.problem.phi = get_or<double>(p, "problem", "phi", -2.0);
  cfg.problem.terminal = get_or<std::string>(
      p, "problem", "terminal",
      cfg.problem.kind == "lqg" ? "log_quadratic" : "coordinate_sum");

  const json& nw = j.at("network");
  require_keys(nw, "network", {"layer_dims"});
  if (!nw.contains("layer_dims")) throw ConfigError("network.layer_dims is required");
  cfg.network.layer_dims = nw.at("layer_dims").get<std::vector<int>>();

  const json& t = j.at("train");
  require_keys(t, "train",
               {"M", "K", "eta", "lambda", "N1", "N2", "lr0", "lr_schedule", "adam_beta1",
                "adam_beta2", "adam_eps", "seed", "loss_mode", "lp_p", "attack_domain",
                "attack_boundary", "attack_time", "fd_step", "x_clamp_radius"});
  cfg.train.M = get_or<int>(t, "train", "M", 1);
  cfg.train.K = get_or<int>(t, "train", "K", 20);
  cfg.train.eta = get_or<double>(t, "train", "eta", 0.05);
  cfg.train.lambda = get_or<double>(t, "train", "lambda", 1.0);
  cfg.train.N1 = get_or<int>(t, "train", "N1", 100);
  cfg.train.N2 = get_or<int>(t, "train", "N2", 100);
  cfg.train.lr0 = get_or<double>(t, "train", "lr0", 7e-4);
  const auto schedule = get_or<std::string>(t, "train", "lr_schedule", "linear_to_zero");
  if (schedule != "linear_to_zero") fail("train.lr_schedule", "only linear_to_zero is supported");
  cfg.train.adam_beta1 = get_or<double>(t, "train", "adam_beta1", 0.9);
  cfg.train.adam_beta2 = get_or<double>(t, "train", "adam_beta2", 0.999);
  cfg.train.adam_eps = get_or<double>(t, "train", "adam_eps", 1e-8);
  cfg.train.seed = get_or<std::uint64_t>(t, "train", "seed", 0);
  const auto mode = get_or<std::string>(t, "train", "loss_mode", "adversarial");
  if (mode == "adversarial") {
    cfg.train.loss_mode = LossMode::Adversarial;
  } else if (mode == "l2") {
    cfg.train.loss_mode = LossMode::L2;
  } else if (mode == "lp") {
    cfg.train.loss_mode = LossMode::Lp;
  } else {
    fail("train.loss_mode", "must be adversarial, l2, or lp");
  }
  cfg.train.lp_p = get_or<double>(t, "train", "lp_p", 2.0);
  cfg.train.attack_domain = get_or<bool>(t, "train", "attack_domain", true);
  cfg.train.attack_boundary = get_or<bool>(t, "train", "attack_boundary", true);
  if (cfg.train.loss_mode == LossMode::Lp) {
    cfg.train.attack_domain = get_or<bool>(t, "train", "attack_domain", false);
    cfg.train.attack_boundary = get_or<bool>(t, "train", "attack_boundary", false);
  }
  cfg.train.attack_time = get_or<bool>(t, "train", "attack_time", true);
  cfg.train.fd_step = get_or<double>(t, "train", "fd_step", 1e-3);
  if (t.contains("x_clamp_radius") && !t.at("x_clamp_radius").is_null()) {
    cfg.train.x_clamp_radius = get_or<double>(t, "train", "x_clamp_radius", 0.0);
  }
  cfg.train.t_max = cfg.problem.T;

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    require_keys(e, "eval", {"S", "oracle_mc_samples", "seed", "grid"});
    cfg.eval.S = get_or<int>(e, "eval", "S", 10000);
    cfg.eval.oracle_mc_samples = get_or<int>(e, "eval", "oracle_mc_samples", 10000);
    cfg.eval.seed = get_or<std::uint64_t>(e, "eval", "seed", 424242);
    if (e.contains("grid")) {
      const json& g = e.at("grid");
      require_keys(g, "eval.grid",
                   {"resolution", "x1_min", "x1_max", "x2_min", "x2_max", "fixed_value", "t"});
      cfg.eval.grid.resolution = get_or<int>(g, "eval.grid", "resolution", 101);
      cfg.eval.grid.x1_min = get_or<double>(g, "eval.grid", "x1_min", 0.0);
      cfg.eval.grid.x1_max = get_or<double>(g, "eval.grid", "x1_max", 1.0);
      cfg.eval.grid.x2_min = get_or<double>(g, "eval.grid", "x2_min", 0.0);
      cfg.eval.grid.x2_max = get_or<double>(g, "eval.grid", "x2_max", 1.0);
      cfg.eval.grid.fixed_value = get_or<double>(g, "eval.grid", "fixed_value", 0.0);
      cfg.eval.grid.t = get_or<double>(g, "eval.grid", "t", 0.0);
    }
  }
  if (j.contains("io")) {
    const json& io = j.at("io");
    require_keys(io, "io", {"out_dir", "checkpoint_interval"});
    cfg.io.out_dir = get_or<std::string>(io, "io", "out_dir", "runs");
    cfg.io.checkpoint_interval = get_or<int>(io, "io", "checkpoint_interval", 0);
  }
  return cfg;
}

/// Full consistency pass: problem invariants, train invariants, network shape.
inline void validate_config(const RunConfig& cfg) {
  ProblemSpec spec = make_problem(cfg.problem);
  cfg.train.validate();
  if (cfg.network.layer_dims.empty()) throw ConfigError("network.layer_dims is required");
  if (cfg.network.layer_dims.front() != spec.n + 1) {
    throw ConfigError("network.layer_dims[0] must equal problem.n + 1");
  }
  if (cfg.network.layer_dims.back() != 1) {
    throw ConfigError("network.layer_dims must end in 1");
  }
  for (int d : cfg.network.layer_dims) {
    if (d <= 0) throw ConfigError("network.layer_dims entries must be positive");
  }
  if (cfg.eval.S < 0 || cfg.eval.oracle_mc_samples < 2) {
    throw ConfigError("eval.S must be >= 0 and eval.oracle_mc_samples >= 2");
  }
  if (cfg.eval.grid.resolution < 2) throw ConfigError("eval.grid.resolution must be >= 2");
  if (cfg.io.checkpoint_interval < 0) {
    throw ConfigError("io.checkpoint_interval must be >= 0");
  }
}

/// Canonical serialization: alphabetical keys, shortest round-trip floats.
/// The content hash is computed over exactly these bytes.
inline std::string serialize_config(const RunConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

inline RunConfig parse_config_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  RunConfig cfg = config_from_json(j);
  validate_config(cfg);
  return cfg;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// --- presets -------------------------------------------------------------------

/// Named experiment recipes. The paper-scale entries transcribe the reference
/// hyperparameter table; *-desk variants shrink n, width, and the iteration
/// budget to workstation scale while keeping every other knob.
inline RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  auto lqg_like = [&](int n, int width, int M, int batch) {
    cfg.problem.kind = "lqg";
    cfg.problem.n = n;
    cfg.problem.T = 1.0;
    cfg.problem.mu = 1.0;
    cfg.network.layer_dims = {n + 1, width, width, width, 1};
    cfg.train.M = M;
    cfg.train.K = 20;
    cfg.train.eta = 0.05;
    cfg.train.N1 = batch;
    cfg.train.N2 = batch;
    cfg.train.lr0 = 7e-4;
    cfg.train.loss_mode = LossMode::Adversarial;
    cfg.train.t_max = 1.0;
    cfg.eval.grid.fixed_value = 0.0;
  };
  auto hjb_like = [&](int n, int width, int M, int batch, double c) {
    cfg.problem.kind = "power_hjb";
    cfg.problem.n = n;
    cfg.problem.T = 1.0;
    cfg.problem.sigma = std::sqrt(2.0);
    cfg.problem.A = std::string("one_over_n");
    cfg.problem.c = c;
    cfg.problem.phi = -2.0;
    cfg.problem.terminal = "coordinate_sum";
    // five linear layers for the power-cost family
    cfg.network.layer_dims = {n + 1, width, width, width, width, 1};
    cfg.train.M = M;
    cfg.train.K = 5;
    cfg.train.eta = 0.2;
    cfg.train.N1 = batch;
    cfg.train.N2 = batch;
    cfg.train.lr0 = 7e-4;
    cfg.train.loss_mode = LossMode::Adversarial;
    cfg.train.t_max = 1.0;
    cfg.eval.grid.fixed_value = 1.0;
  };
  if (name == "lqg100") {
    lqg_like(100, 4096, 5000, 100);
  } else if (name == "lqg250") {
    lqg_like(250, 4096, 10000, 50);
  } else if (name == "lqg10-desk") {
    lqg_like(10, 256, 2000, 100);
  } else if (name == "hjb-c1.25") {
    hjb_like(100, 4096, 5000, 100, 1.25);
  } else if (name == "hjb-c1.5") {
    hjb_like(100, 4096, 5000, 100, 1.5);
  } else if (name == "hjb-c1.75") {
    hjb_like(100, 4096, 5000, 100, 1.75);
  } else if (name == "hjb-c1.25-desk") {
    hjb_like(10, 256, 2000, 100, 1.25);
  } else if (name == "hjb-c1.5-desk") {
    hjb_like(10, 256, 2000, 100, 1.5);
  } else if (name == "hjb-c1.75-desk") {
    hjb_like(10, 256, 2000, 100, 1.75);
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  validate_config(cfg);
  return cfg;
}

inline std::vector<std::string> preset_names() {
  return {"lqg100",     "lqg250",     "lqg10-desk",    "hjb-c1.25",     "hjb-c1.5",
          "hjb-c1.75",  "hjb-c1.25-desk", "hjb-c1.5-desk", "hjb-c1.75-desk"};
}

namespace cfgdetail {

inline void apply_override_json(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);
  json* node = &doc;
  std::size_t begin = 0;
  std::vector<std::string> parts;
  while (true) {
    const auto dot = path.find('.', begin);
    parts.push_back(path.substr(begin, dot == std::string::npos ? dot : dot - begin));
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  if (parts.empty() || parts.front().empty()) throw ConfigError("empty override path");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &((*node)[parts[i]]);
  }
  json value = json::parse(value_text, nullptr, false);
  if (value.is_discarded()) value = value_text;  // plain string
  (*node)[parts.back()] = value;
}

}  // namespace cfgdetail

/// Applies `--set section.key=value` overrides onto a config; the combined
/// result is validated once, so interdependent keys can change together.
/// Values parse as JSON when possible, else as strings.
inline RunConfig apply_overrides(const RunConfig& cfg,
                                 const std::vector<std::string>& assignments) {
  json doc = config_to_json(cfg);
  for (const auto& assignment : assignments) {
    cfgdetail::apply_override_json(doc, assignment);
  }
  RunConfig out = config_from_json(doc);
  validate_config(out);
  return out;
}

inline RunConfig apply_override(const RunConfig& cfg, const std::string& assignment) {
  return apply_overrides(cfg, {assignment});
}

}  // namespace hjb
