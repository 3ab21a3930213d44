#include "vididi/network.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace vididi {

namespace {

enum class LayerKind { Linear, Act, Norm, BatchNorm, Pool };

struct Layer {
  LayerKind kind;
  std::string weight;
  std::string bias;
  std::size_t in = 0;
  std::size_t out = 0;
};

constexpr double kNormEps = 1e-5;

void append_mlp(std::vector<Layer>& layers, const std::string& prefix, std::size_t in,
                const std::vector<std::size_t>& hidden, std::size_t out, NormKind norm) {
  std::size_t width = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const std::string base = prefix + ".l" + std::to_string(i);
    layers.push_back({LayerKind::Linear, base + ".weight", base + ".bias", width, hidden[i]});
    if (norm == NormKind::Layer) layers.push_back({LayerKind::Norm, {}, {}, hidden[i], hidden[i]});
    if (norm == NormKind::Batch) layers.push_back({LayerKind::BatchNorm, {}, {}, hidden[i], hidden[i]});
    layers.push_back({LayerKind::Act, {}, {}, hidden[i], hidden[i]});
    width = hidden[i];
  }
  layers.push_back({LayerKind::Linear, prefix + ".out.weight", prefix + ".out.bias", width, out});
}

std::vector<Layer> build_layers(const NetSpec& spec, Head head) {
  std::vector<Layer> layers;
  append_mlp(layers, "encoder", spec.input_dim(), spec.encoder_hidden, spec.feature_dim,
             spec.encoder_norm);
  layers.push_back({LayerKind::Pool, {}, {}, spec.feature_dim, spec.feature_dim});
  if (head == Head::Features) return layers;
  if (!spec.with_projector) throw std::invalid_argument("forward: spec has no projector");
  append_mlp(layers, "projector", spec.feature_dim, spec.projector_hidden, spec.projector_out,
             spec.head_norm);
  if (head == Head::Projection) return layers;
  if (!spec.with_predictor) throw std::invalid_argument("forward: spec has no predictor");
  append_mlp(layers, "predictor", spec.projector_out, spec.predictor_hidden, spec.predictor_out,
             spec.head_norm);
  return layers;
}

std::vector<Layer> all_layers(const NetSpec& spec) {
  if (spec.with_predictor) return build_layers(spec, Head::Prediction);
  if (spec.with_projector) return build_layers(spec, Head::Projection);
  return build_layers(spec, Head::Features);
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& x, Activation a) {
  switch (a) {
    case Activation::ReLU: return x.cwiseMax(0.0);
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Identity: return x;
  }
  return x;
}

}  // namespace

struct TapeAccess {
  static Tape make(const ParamSet& params, const NetSpec& spec, Head head, std::size_t frames) {
    Tape t;
    t.params_ = &params;
    t.version_ = params.version();
    t.spec_ = spec;
    t.head_ = head;
    t.frames_ = frames;
    return t;
  }
  static std::vector<Tape::Entry>& entries(Tape& t) { return t.entries_; }
  static const std::vector<Tape::Entry>& entries(const Tape& t) { return t.entries_; }
  static const ParamSet* params(const Tape& t) { return t.params_; }
  static std::uint64_t version(const Tape& t) { return t.version_; }
  static const NetSpec& spec(const Tape& t) { return t.spec_; }
  static Head head(const Tape& t) { return t.head_; }
  static std::size_t frames(const Tape& t) { return t.frames_; }
};

void NetSpec::validate() const {
  if (input_dim() == 0) throw std::invalid_argument("net: input dims must be positive");
  if (feature_dim == 0) throw std::invalid_argument("net.feature_dim must be > 0");
  for (std::size_t w : encoder_hidden) {
    if (w == 0) throw std::invalid_argument("net.encoder_hidden widths must be > 0");
  }
  for (std::size_t w : projector_hidden) {
    if (w == 0) throw std::invalid_argument("net.projector_hidden widths must be > 0");
  }
  for (std::size_t w : predictor_hidden) {
    if (w == 0) throw std::invalid_argument("net.predictor_hidden widths must be > 0");
  }
  if (with_projector && projector_out == 0) {
    throw std::invalid_argument("net.projector_out must be > 0");
  }
  if (encoder_norm == NormKind::Batch) {
    throw std::invalid_argument("net.encoder_norm: batch normalization is only supported in the heads");
  }
  if (with_predictor && (!with_projector || predictor_out == 0)) {
    throw std::invalid_argument("net: a predictor needs a projector and predictor_out > 0");
  }
}

ParamSet init_params(const NetSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamSet params;
  std::map<std::string, Eigen::Index> fan_in;
  for (const Layer& l : all_layers(spec)) {
    if (l.kind != LayerKind::Linear) continue;
    params.add(l.weight, static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in), 2);
    params.add(l.bias, static_cast<Eigen::Index>(l.out), 1, 1);
    fan_in[l.weight] = static_cast<Eigen::Index>(l.in);
    fan_in[l.bias] = static_cast<Eigen::Index>(l.in);
  }
  init_uniform_fan_in(params, fan_in, seed);
  return params;
}

Eigen::MatrixXd clips_to_rows(const ClipBatch& batch) {
  const std::size_t T = batch.frames();
  const std::size_t plane = batch.height() * batch.width();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(batch.size() * T),
                    static_cast<Eigen::Index>(batch.channels() * plane));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const VideoTensor& clip = batch[b];
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = static_cast<Eigen::Index>(b * T + t);
      for (std::size_t c = 0; c < clip.channels(); ++c) {
        auto src = clip.plane(c, t);
        for (std::size_t i = 0; i < plane; ++i) {
          x(row, static_cast<Eigen::Index>(c * plane + i)) = src[i];
        }
      }
    }
  }
  return x;
}

ForwardResult forward(const ParamSet& params, const NetSpec& spec, const ClipBatch& batch,
                      Head head) {
  if (batch.size() == 0) throw std::invalid_argument("forward: empty batch");
  if (batch.channels() != spec.in_channels || batch.height() != spec.in_height ||
      batch.width() != spec.in_width) {
    throw std::invalid_argument("forward: clip shape " + std::to_string(batch.channels()) + "x" +
                                std::to_string(batch.height()) + "x" +
                                std::to_string(batch.width()) + " does not match net input " +
                                std::to_string(spec.in_channels) + "x" +
                                std::to_string(spec.in_height) + "x" +
                                std::to_string(spec.in_width));
  }
  const std::size_t T = batch.frames();
  ForwardResult result;
  result.tape = TapeAccess::make(params, spec, head, T);
  auto& entries = TapeAccess::entries(result.tape);

  Eigen::MatrixXd x = clips_to_rows(batch);
  const auto layers = build_layers(spec, head);
  entries.reserve(layers.size());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& l = layers[li];
    Tape::Entry e;
    e.layer = static_cast<int>(li);
    Eigen::MatrixXd y;
    switch (l.kind) {
      case LayerKind::Linear: {
        const auto& w = params.get(l.weight);
        const auto& b = params.get(l.bias);
        y = x * w.transpose();
        y.rowwise() += b.col(0).transpose();
        e.input = std::move(x);
        break;
      }
      case LayerKind::Act:
        y = activate(x, spec.activation);
        e.input = std::move(x);
        e.output = y;
        break;
      case LayerKind::Norm: {
        const Eigen::VectorXd mean = x.rowwise().mean();
        Eigen::MatrixXd centered = x.colwise() - mean;
        const Eigen::VectorXd var = centered.rowwise().squaredNorm() / static_cast<double>(x.cols());
        e.aux = (var.array() + kNormEps).rsqrt().matrix();
        y = e.aux.asDiagonal() * centered;
        e.output = y;
        break;
      }
      case LayerKind::BatchNorm: {
        // Statistics over the batch rows; no running averages are kept.
        const Eigen::RowVectorXd mean = x.colwise().mean();
        Eigen::MatrixXd centered = x.rowwise() - mean;
        const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / static_cast<double>(x.rows());
        e.aux = (var.array() + kNormEps).rsqrt().matrix();
        y = centered * e.aux.asDiagonal();
        e.output = y;
        break;
      }
      case LayerKind::Pool: {
        const auto B = static_cast<Eigen::Index>(batch.size());
        y.resize(B, x.cols());
        for (Eigen::Index b = 0; b < B; ++b) {
          y.row(b) = x.middleRows(b * static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T))
                         .colwise()
                         .mean();
        }
        break;
      }
    }
    entries.push_back(std::move(e));
    x = std::move(y);
  }
  result.output = std::move(x);
  return result;
}

void backward_into(const Tape& tape, const EmbeddingBatch& upstream, ParamSet& grads) {
  const ParamSet* params = TapeAccess::params(tape);
  if (params == nullptr) throw std::logic_error("backward: empty tape");
  if (params->version() != TapeAccess::version(tape)) {
    throw std::logic_error("backward: stale tape (parameters changed after forward)");
  }
  const NetSpec& spec = TapeAccess::spec(tape);
  const auto layers = build_layers(spec, TapeAccess::head(tape));
  const auto& entries = TapeAccess::entries(tape);
  const auto T = static_cast<Eigen::Index>(TapeAccess::frames(tape));

  Eigen::MatrixXd g = upstream;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& l = layers[k];
    const Tape::Entry& e = entries[k];
    switch (l.kind) {
      case LayerKind::Linear: {
        if (g.cols() != static_cast<Eigen::Index>(l.out)) {
          throw std::invalid_argument("backward: upstream gradient has wrong width");
        }
        grads.mut(l.weight).noalias() += g.transpose() * e.input;
        grads.mut(l.bias).col(0) += g.colwise().sum().transpose();
        if (k > 0) g = g * params->get(l.weight);
        break;
      }
      case LayerKind::Act:
        switch (spec.activation) {
          case Activation::ReLU:
            g = g.cwiseProduct((e.input.array() > 0.0).cast<double>().matrix());
            break;
          case Activation::Tanh:
            g = g.cwiseProduct((1.0 - e.output.array().square()).matrix());
            break;
          case Activation::Identity:
            break;
        }
        break;
      case LayerKind::Norm: {
        const auto n = static_cast<double>(g.cols());
        const Eigen::VectorXd mean_g = g.rowwise().sum() / n;
        const Eigen::VectorXd mean_gy = g.cwiseProduct(e.output).rowwise().sum() / n;
        Eigen::MatrixXd dx = g.colwise() - mean_g;
        dx -= mean_gy.asDiagonal() * e.output;
        g = e.aux.asDiagonal() * dx;
        break;
      }
      case LayerKind::BatchNorm: {
        const auto n = static_cast<double>(g.rows());
        const Eigen::RowVectorXd mean_g = g.colwise().sum() / n;
        const Eigen::RowVectorXd mean_gy = g.cwiseProduct(e.output).colwise().sum() / n;
        Eigen::MatrixXd dx = g.rowwise() - mean_g;
        dx -= e.output * mean_gy.asDiagonal();
        g = dx * e.aux.asDiagonal();
        break;
      }
      case LayerKind::Pool: {
        Eigen::MatrixXd dx(g.rows() * T, g.cols());
        for (Eigen::Index b = 0; b < g.rows(); ++b) {
          dx.middleRows(b * T, T).rowwise() = g.row(b) / static_cast<double>(T);
        }
        g = std::move(dx);
        break;
      }
    }
  }
}

ParamSet backward(const Tape& tape, const EmbeddingBatch& upstream) {
  const ParamSet* params = TapeAccess::params(tape);
  if (params == nullptr) throw std::logic_error("backward: empty tape");
  ParamSet grads = params->zeros_like();
  backward_into(tape, upstream, grads);
  return grads;
}

}  // namespace vididi
