#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vididi/config.hpp"
#include "vididi/eval.hpp"
#include "vididi/synthdata.hpp"
#include "vididi/tensor_io.hpp"
#include "vididi/train.hpp"

namespace vididi {

enum class LabelKind { Dynamic, Static };

/// Features of every dataset video, tagged with its split and chosen label.
LabeledEmbeddings embed_dataset(const SynthDataset& ds, const ParamSet& params,
                                const NetSpec& spec, const EmbedOptions& opts, LabelKind labels,
                                std::size_t workers = 1);

struct EvalReport {
  std::string labels;
  std::size_t queries = 0;
  std::size_t database = 0;
  std::size_t dim = 0;
  std::map<std::size_t, double> recall;
  double silhouette = 0.0;
  double probe_accuracy = 0.0;
};

/// Test rows query the train rows; silhouette is over all rows; the probe
/// fits on train and scores on test.
EvalReport evaluate_embeddings(const LabeledEmbeddings& all, const std::vector<std::size_t>& ks,
                               const ProbeOptions& probe, const std::string& label_name);
std::string format_report(const EvalReport& report);

/// Training with the config's derived settings on `ds`.
TrainResult run_training(const SynthDataset& ds, const ExperimentConfig& cfg,
                         const StepCallback& on_step = {});

/// Columns: step,epoch,order_a,order_b,lr,tau,loss, then one per loss term.
std::string format_train_log(const std::vector<StepLog>& log);

/// Online parameters under "online.", the BYOL target under "target.".
std::vector<StoredTensor> checkpoint_tensors(const TrainResult& result);

struct CompareRow {
  std::string schedule;
  std::uint64_t seed = 0;
  double dynamic_recall1 = 0.0;
  double static_recall1 = 0.0;
};

/// Trains with schedule base and vididi for seeds cfg.seed .. cfg.seed+seeds-1
/// and scores recall@1 against both label kinds.
std::vector<CompareRow> run_compare(const SynthDataset& ds, const ExperimentConfig& cfg,
                                    std::size_t seeds);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};
MeanSd mean_sd(const std::vector<double>& values);

/// Row table followed by mean±sd per schedule and metric.
std::string format_compare(const std::vector<CompareRow>& rows);

struct GenerateArgs {
  std::size_t videos = 64;
  std::size_t g_classes = 4;
  std::size_t bg_classes = 4;
  std::size_t frames = 32;
  std::size_t size = 16;
  std::size_t channels = 3;
  double bg_contrast = 1.0;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "data";
  bool shortcut = false;
  std::size_t workers = 1;
};

struct TrainArgs {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool freeze_random_diff = false;
  std::filesystem::path out = "run";
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  /// Defaults to config.toml next to the checkpoint.
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> data;
  std::string labels = "dynamic";
  std::filesystem::path out = "eval";
  bool svg = false;
  std::optional<std::size_t> workers;
};

struct CompareArgs {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::size_t seeds = 1;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "compare";
};

/// Commands return the process exit code: 0 success, 1 runtime failure,
/// 2 usage or config error.
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);

}  // namespace vididi
