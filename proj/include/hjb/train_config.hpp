#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hjb/errors.hpp"

namespace hjb {

enum class LossMode { Adversarial, L2, Lp };
enum class LrSchedule { LinearToZero };

/// Every knob of the training loop. Defaults follow the reference recipe:
/// Adam(0.9, 0.999, 1e-8), inner loop K=20 steps of size 0.05, equal domain
/// and boundary weighting.
struct TrainConfig {
  int M = 1;                 // outer iterations
  int K = 20;                // inner-loop iterations (0 disables the attack)
  double eta = 0.05;         // inner-loop step size
  double lambda = 1.0;       // boundary-loss weight
  int N1 = 100;              // domain batch size
  int N2 = 100;              // boundary batch size
  double lr0 = 7e-4;
  LrSchedule lr_schedule = LrSchedule::LinearToZero;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  LossMode loss_mode = LossMode::Adversarial;
  double lp_p = 2.0;         // exponent for loss_mode == Lp
  bool attack_domain = true;
  bool attack_boundary = true;
  double fd_step = 1e-3;     // inner-loop finite-difference step
  double t_max = 1.0;        // attack projection clamps t into [0, t_max]
  std::optional<double> x_clamp_radius;  // optional spatial projection ball
  bool attack_time = true;   // include the time coordinate in the domain attack

  void validate() const {
    if (M < 1) throw ConfigError("train: M must be >= 1");
    if (K < 0) throw ConfigError("train: K must be >= 0");
    if (!(eta > 0.0)) throw ConfigError("train: eta must be > 0");
    if (lambda < 0.0) throw ConfigError("train: lambda must be >= 0");
    if (N1 < 1 || N2 < 1) throw ConfigError("train: batch sizes must be >= 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < adam_beta2 && adam_beta2 < 1.0)) {
      throw ConfigError("train: need 0 < beta1 < beta2 < 1");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("train: adam_eps must be > 0");
    if (!(lr0 > 0.0)) throw ConfigError("train: lr0 must be > 0");
    if (!(fd_step > 0.0)) throw ConfigError("train: fd_step must be > 0");
    if (!(t_max > 0.0)) throw ConfigError("train: t_max must be > 0");
    if (loss_mode == LossMode::Lp) {
      if (lp_p < 2.0) throw ConfigError("train: lp mode requires p >= 2");
      if (attack_domain || attack_boundary) {
        throw ConfigError("train: lp mode requires the attack flags off");
      }
    }
    if (x_clamp_radius && !(*x_clamp_radius > 0.0)) {
      throw ConfigError("train: x_clamp_radius must be > 0 when set");
    }
  }
};

inline std::string loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::Adversarial: return "adversarial";
    case LossMode::L2: return "l2";
    case LossMode::Lp: return "lp";
  }
  return "?";
}

}  // namespace hjb
