#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vididi/objectives.hpp"
#include "vididi/params.hpp"
#include "vididi/video_tensor.hpp"

namespace vididi {

enum class Activation { ReLU, Tanh, Identity };
/// Batch normalizes each column over the batch rows with the statistics of
/// the current batch; it is only allowed in the heads.
enum class NormKind { None, Layer, Batch };

/// Encoder: per-frame flatten -> hidden layers -> feature layer -> temporal
/// mean pool. Projector and predictor are MLPs on the pooled features.
struct NetSpec {
  std::size_t in_channels = 3;
  std::size_t in_height = 16;
  std::size_t in_width = 16;
  std::vector<std::size_t> encoder_hidden{64, 64};
  std::size_t feature_dim = 32;
  std::vector<std::size_t> projector_hidden{64, 64};
  std::size_t projector_out = 32;
  std::vector<std::size_t> predictor_hidden{64};
  std::size_t predictor_out = 32;
  bool with_projector = true;
  bool with_predictor = false;
  Activation activation = Activation::ReLU;
  NormKind encoder_norm = NormKind::None;
  NormKind head_norm = NormKind::Layer;

  std::size_t input_dim() const { return in_channels * in_height * in_width; }
  void validate() const;

  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

/// How far a forward pass goes.
enum class Head { Features, Projection, Prediction };

/// Parameters for `spec`, initialized with the fan-in uniform rule.
ParamSet init_params(const NetSpec& spec, std::uint64_t seed);

/// Activations recorded by a forward pass; consumed by `backward`.
class Tape {
 public:
  struct Entry {
    int layer = 0;
    Eigen::MatrixXd input;
    Eigen::MatrixXd output;
    Eigen::VectorXd aux;
  };

 private:
  friend struct TapeAccess;
  const ParamSet* params_ = nullptr;
  std::uint64_t version_ = 0;
  NetSpec spec_;
  Head head_ = Head::Features;
  std::size_t frames_ = 0;
  std::vector<Entry> entries_;
};

struct ForwardResult {
  EmbeddingBatch output;
  Tape tape;
};

/// Stacks clips as rows (item, frame) with columns (channel, y, x).
Eigen::MatrixXd clips_to_rows(const ClipBatch& batch);

ForwardResult forward(const ParamSet& params, const NetSpec& spec, const ClipBatch& batch,
                      Head head);

/// Gradient of <upstream, output> with respect to every parameter. Throws
/// if the parameters changed since the forward pass that produced `tape`.
ParamSet backward(const Tape& tape, const EmbeddingBatch& upstream);

/// As above, accumulating into `grads`.
void backward_into(const Tape& tape, const EmbeddingBatch& upstream, ParamSet& grads);

}  // namespace vididi
