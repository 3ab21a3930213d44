#include "vididi/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vididi {

double lr_at(std::uint64_t k, std::uint64_t K, double eta, std::uint64_t warmup_steps) {
  if (k > K) throw std::out_of_range("lr_at: k exceeds K");
  if (warmup_steps > 0 && k < warmup_steps) {
    return eta * static_cast<double>(k) / static_cast<double>(warmup_steps);
  }
  if (K <= warmup_steps) return eta;
  const double progress =
      static_cast<double>(k - warmup_steps) / static_cast<double>(K - warmup_steps);
  if (progress == 1.0) return 0.0;
  return eta * 0.5 * (std::cos(progress * std::numbers::pi) + 1.0);
}

double tau_at(std::uint64_t k, std::uint64_t K, double tau_base) {
  if (k > K) throw std::out_of_range("tau_at: k exceeds K");
  if (K == 0 || k == K) return 1.0;
  const double c = std::cos(static_cast<double>(k) / static_cast<double>(K) * std::numbers::pi);
  return 1.0 - (1.0 - tau_base) * (c + 1.0) / 2.0;
}

double lars_trust_ratio(double weight_norm, double direction_norm) {
  if (weight_norm > 0.0 && direction_norm > 0.0) return weight_norm / direction_norm;
  return 1.0;
}

void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state, double lr) {
  if (!params.same_layout(grads)) throw std::invalid_argument("sgd_step: gradient layout mismatch");
  if (state.velocity.size() == 0) state.velocity = params.zeros_like();
  if (!state.velocity.same_layout(params)) {
    throw std::invalid_argument("sgd_step: momentum buffer layout mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& w = params.tensor_at(i).value;
    const Eigen::MatrixXd& g = grads.tensor_at(i).value;
    Eigen::MatrixXd& v = state.velocity.tensor_at(i).value;
    if (state.lars) {
      Eigen::MatrixXd d = g + state.weight_decay * w;
      d *= lars_trust_ratio(w.norm(), d.norm());
      v = state.momentum * v + d;
      w -= lr * v;
    } else {
      v = state.momentum * v + g;
      w -= lr * v + (lr * state.weight_decay) * w;
    }
  }
}

void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state) {
  sgd_step(params, grads, state, state.current_lr());
  if (state.step < state.total_steps) ++state.step;
}

void ema_update(const ParamSet& online, ParamSet& target, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("ema_update: tau must be in [0,1]");
  if (!online.same_layout(target)) throw std::invalid_argument("ema_update: layout mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    Eigen::MatrixXd& t = target.tensor_at(i).value;
    const Eigen::MatrixXd& o = online.tensor_at(i).value;
    if (tau == 1.0) continue;
    if (tau == 0.0) {
      t = o;
    } else {
      // Same as tau t + (1 - tau) o, written so online == target is a fixed point.
      t += (1.0 - tau) * (o - t);
    }
  }
}

}  // namespace vididi
