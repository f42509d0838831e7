#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hjb/config.hpp"
#include "hjb/errors.hpp"
#include "hjb/metrics.hpp"

namespace hjb {

/// SHA-1 hex digest of the canonical config serialization; flips whenever any
/// config byte changes.
inline std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("sha1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string config_hash(const RunConfig& cfg) {
  return sha1_hex(serialize_config(cfg));
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Everything needed to reproduce and audit one run.
struct RunManifest {
  json config_echo;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::optional<MetricsRecord> metrics;
  std::string trace_path;
  std::vector<std::string> checkpoint_paths;
  std::string abort_reason;
  int attack_faults = 0;
  double wall_seconds = 0.0;
  int threads = 1;
  json evaluations = json::array();  // appended by later evaluate commands

  json to_json() const {
    json j;
    j["config"] = config_echo;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    if (metrics) {
      j["metrics"] = {{"l1_rel", metrics->l1_rel},
                      {"l2_rel", metrics->l2_rel},
                      {"w11_rel", metrics->w11_rel},
                      {"samples_S", metrics->samples_S},
                      {"seed", metrics->seed}};
    } else {
      j["metrics"] = nullptr;
    }
    j["trace_path"] = trace_path;
    j["checkpoint_paths"] = checkpoint_paths;
    j["abort_reason"] = abort_reason.empty() ? json(nullptr) : json(abort_reason);
    j["attack_faults"] = attack_faults;
    j["wall_seconds"] = wall_seconds;
    j["threads"] = threads;
    j["evaluations"] = evaluations;
    return j;
  }
};

/// Writes via a temp file plus rename so a crash never leaves a torn manifest.
inline void write_json_atomic(const std::filesystem::path& path, const json& j) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write manifest: " + tmp.string());
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("manifest write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<json> read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace hjb
