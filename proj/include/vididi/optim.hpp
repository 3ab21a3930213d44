#pragma once

#include <cstdint>

#include "vididi/params.hpp"

namespace vididi {

/// Linear warmup from 0 to `eta` over `warmup_steps`, then cosine decay
/// eta * 0.5 * (cos(pi * k' / K') + 1) over the remaining steps.
double lr_at(std::uint64_t k, std::uint64_t K, double eta, std::uint64_t warmup_steps = 0);

/// EMA coefficient 1 - (1 - tau_base) * (cos(pi k / K) + 1) / 2.
double tau_at(std::uint64_t k, std::uint64_t K, double tau_base);

struct OptimState {
  std::uint64_t step = 0;
  std::uint64_t total_steps = 1;
  double base_lr = 0.12;
  std::uint64_t warmup_steps = 0;
  double weight_decay = 1e-6;
  double momentum = 0.9;
  double tau_base = 0.99;
  bool lars = false;
  ParamSet velocity;

  double current_lr() const { return lr_at(step, total_steps, base_lr, warmup_steps); }
  double current_tau() const { return tau_at(step, total_steps, tau_base); }
};

/// Per-tensor LARS trust ratio |w| / |d|; 1 when either norm is zero.
double lars_trust_ratio(double weight_norm, double direction_norm);

/// One momentum-SGD step at learning rate `lr`.
/// Plain mode: v = m v + g; w -= lr v + lr wd w (decoupled decay).
/// LARS mode: d = g + wd w scaled by |w|/|d| per tensor; v = m v + d; w -= lr v.
void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state, double lr);

/// Steps with the scheduled rate and advances `state.step`.
void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state);

/// target <- tau * target + (1 - tau) * online.
void ema_update(const ParamSet& online, ParamSet& target, double tau);

}  // namespace vididi
