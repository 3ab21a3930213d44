#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vididi/augment.hpp"
#include "vididi/network.hpp"
#include "vididi/objectives.hpp"
#include "vididi/optim.hpp"
#include "vididi/params.hpp"
#include "vididi/schedule.hpp"
#include "vididi/synthdata.hpp"

namespace vididi {

enum class Objective { SimCLR, BYOL, VICReg };

std::string_view objective_name(Objective o);
std::optional<Objective> parse_objective(std::string_view name);

/// Objective hyperparameters.
struct LossParams {
  double alpha = 0.1;
  VicRegWeights vicreg;
  friend bool operator==(const LossParams&, const LossParams&) = default;
};

/// Net layout for an objective: 2-layer projector plus predictor for BYOL,
/// 3-layer projector otherwise.
NetSpec default_net_for(Objective objective, std::size_t channels, std::size_t height,
                        std::size_t width);

struct TrainConfig {
  Objective objective = Objective::VICReg;
  SchedulePolicy schedule = SchedulePolicy::ViDiDi;
  std::size_t clip_frames = 8;
  std::size_t stride = 3;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  AugmentConfig augment;
  NetSpec net;
  double lr = 0.12;
  std::size_t warmup_epochs = 0;
  double weight_decay = 1e-6;
  double momentum = 0.9;
  bool lars = false;
  double tau_base = 0.99;
  LossParams loss;
  /// Replace every schedule draw with a value that never increments.
  bool freeze_random_diff = false;
  /// Videos whose split equals this tag are used; empty uses all.
  std::string train_split = "train";
  std::size_t workers = 1;
};

struct StepLog {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  ViewPairSpec pair;
  double lr = 0.0;
  double tau = 0.0;
  double loss = 0.0;
  std::map<std::string, double> terms;

  friend bool operator==(const StepLog&, const StepLog&) = default;
};

struct TrainResult {
  ParamSet params;
  std::optional<ParamSet> target;
  std::vector<StepLog> log;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::uint64_t step, double value);
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

/// Loss and parameter gradient for one pair of input batches. For BYOL the
/// second stream runs through `target` and contributes no gradient.
struct StepLoss {
  LossReport report;
  ParamSet grads;
};

StepLoss objective_step(Objective objective, const ParamSet& online, const ParamSet* target,
                        const NetSpec& spec, const ClipBatch& xa, const ClipBatch& xb,
                        const LossParams& loss);

/// Both augmented, differentiated and truncated views for one batch.
std::pair<ClipBatch, ClipBatch> make_views(const SynthDataset& ds,
                                           const std::vector<std::size_t>& videos,
                                           const TrainConfig& cfg, ViewPairSpec pair,
                                           std::uint64_t epoch, std::uint64_t batch);

std::size_t batches_per_epoch(std::size_t videos, std::size_t batch_size);

using StepCallback = std::function<void(const StepLog&)>;

TrainResult train(const SynthDataset& ds, const TrainConfig& cfg,
                  const StepCallback& on_step = {});

}  // namespace vididi
