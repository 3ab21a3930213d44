#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vididi/eval.hpp"
#include "vididi/train.hpp"

namespace vididi {

/// Config problem with file/line/field context; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::size_t clips = 10;
  std::vector<std::size_t> ks{1, 5, 10};
  bool random_crop = false;
  std::uint64_t seed = 0;
  std::size_t probe_epochs = 300;
  double probe_lr = 0.5;
  std::size_t workers = 1;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

/// Whole experiment. Full-scale defaults are kept where they make sense at
/// desk scale; the learning rate is base_lr * lr_scale.
struct ExperimentConfig {
  std::string dataset_path = "data";
  Objective objective = Objective::VICReg;
  SchedulePolicy schedule = SchedulePolicy::ViDiDi;
  std::size_t clip_frames = 8;
  std::size_t stride = 3;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool freeze_random_diff = false;
  std::size_t workers = 1;

  double base_lr = 1.2;
  // Plain SGD at these batch sizes leaves InfoNCE stuck near its collapsed
  // starting point; LARS with a smaller scale trains all three objectives.
  double lr_scale = 0.003;
  std::size_t byol_warmup_epochs = 10;
  double weight_decay = 1e-6;
  double momentum = 0.9;
  bool lars = true;
  double tau_base = 0.99;

  LossParams loss;
  AugmentConfig augment = desk_augment();
  NetSpec net;  // input dims are taken from the dataset and augment output
  EvalConfig eval;

  static AugmentConfig desk_augment();

  /// Training settings for a dataset with `channels` channels.
  TrainConfig to_train_config(std::size_t channels) const;
  EmbedOptions embed_options() const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the sectioned key = value format. `overrides` are "key=value"
/// strings applied after the file; `key` may be "section.key" or a bare
/// key that is unique across sections. Keys absent from both keep their
/// value from `base`.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              const std::vector<std::string>& overrides = {},
                              const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {},
                             const ExperimentConfig& base = {});
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace vididi
