#include "vididi/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vididi/parallel.hpp"

namespace vididi {

std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::SimCLR: return "simclr";
    case Objective::BYOL: return "byol";
    case Objective::VICReg: return "vicreg";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view name) {
  for (Objective o : {Objective::SimCLR, Objective::BYOL, Objective::VICReg}) {
    if (objective_name(o) == name) return o;
  }
  return std::nullopt;
}

NetSpec default_net_for(Objective objective, std::size_t channels, std::size_t height,
                        std::size_t width) {
  NetSpec spec;
  spec.in_channels = channels;
  spec.in_height = height;
  spec.in_width = width;
  if (objective == Objective::BYOL) {
    spec.projector_hidden = {64};
    spec.with_predictor = true;
  } else {
    spec.projector_hidden = {64, 64};
    spec.with_predictor = false;
  }
  return spec;
}

NonFiniteLoss::NonFiniteLoss(std::uint64_t step, double value)
    : std::runtime_error("non-finite loss " + std::to_string(value) + " at step " +
                         std::to_string(step)),
      step_(step) {}

namespace {

// Embeddings already overflowed; report a NaN loss so the caller can abort
// with the step index instead of a loss-input error.
StepLoss diverged(StepLoss out) {
  out.report.total = std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

StepLoss objective_step(Objective objective, const ParamSet& online, const ParamSet* target,
                        const NetSpec& spec, const ClipBatch& xa, const ClipBatch& xb,
                        const LossParams& loss) {
  StepLoss out;
  out.grads = online.zeros_like();
  switch (objective) {
    case Objective::SimCLR:
    case Objective::VICReg: {
      const ForwardResult fa = forward(online, spec, xa, Head::Projection);
      const ForwardResult fb = forward(online, spec, xb, Head::Projection);
      if (!fa.output.allFinite() || !fb.output.allFinite()) return diverged(std::move(out));
      out.report = objective == Objective::SimCLR
                       ? infonce_loss(fa.output, fb.output, loss.alpha)
                       : vicreg_loss(fa.output, fb.output, loss.vicreg);
      backward_into(fa.tape, out.report.grad_a, out.grads);
      backward_into(fb.tape, out.report.grad_b, out.grads);
      break;
    }
    case Objective::BYOL: {
      if (target == nullptr) throw std::invalid_argument("objective_step: BYOL needs a target network");
      const ForwardResult fa = forward(online, spec, xa, Head::Prediction);
      const ForwardResult fb = forward(*target, spec, xb, Head::Projection);
      if (!fa.output.allFinite() || !fb.output.allFinite()) return diverged(std::move(out));
      out.report = byol_loss(fa.output, fb.output);
      backward_into(fa.tape, out.report.grad_a, out.grads);
      break;
    }
  }
  return out;
}

std::size_t batches_per_epoch(std::size_t videos, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  return std::max<std::size_t>(1, videos / batch_size);
}

std::pair<ClipBatch, ClipBatch> make_views(const SynthDataset& ds,
                                           const std::vector<std::size_t>& videos,
                                           const TrainConfig& cfg, ViewPairSpec pair,
                                           std::uint64_t epoch, std::uint64_t batch) {
  std::vector<VideoTensor> va(videos.size());
  std::vector<VideoTensor> vb(videos.size());
  parallel_for(videos.size(), cfg.workers, [&](std::size_t j) {
    Rng clip_rng(cfg.seed, {key_of("clip"), epoch, batch, j});
    auto [ca, cb] = sample_clip_pair(ds.videos.at(videos[j]), cfg.clip_frames + 2, cfg.stride,
                                     clip_rng);
    Rng rng_a(cfg.seed, {key_of("augment"), epoch, batch, j, 0});
    Rng rng_b(cfg.seed, {key_of("augment"), epoch, batch, j, 1});
    // Augment first, then differentiate, then match lengths.
    auto aug_a = spatial_augment(ca, cfg.augment, rng_a).first;
    auto aug_b = spatial_augment(cb, cfg.augment, rng_b).first;
    va[j] = truncate_frames(differentiate(aug_a, pair.order_a), cfg.clip_frames);
    vb[j] = truncate_frames(differentiate(aug_b, pair.order_b), cfg.clip_frames);
  });
  return {ClipBatch(std::move(va)), ClipBatch(std::move(vb))};
}

TrainResult train(const SynthDataset& ds, const TrainConfig& cfg, const StepCallback& on_step) {
  cfg.augment.validate();
  cfg.net.validate();
  if (cfg.clip_frames == 0 || cfg.stride == 0) throw std::invalid_argument("train: T and stride must be >= 1");
  if (cfg.net.in_height != cfg.augment.out_height || cfg.net.in_width != cfg.augment.out_width) {
    throw std::invalid_argument("train: net input size must equal the augmentation output size");
  }
  const bool byol = cfg.objective == Objective::BYOL;
  if (byol && !cfg.net.with_predictor) throw std::invalid_argument("train: BYOL needs a predictor");

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.videos.size(); ++i) {
    if (cfg.train_split.empty() || ds.meta.at(i).split == cfg.train_split) pool.push_back(i);
  }
  if (pool.size() < 2) throw std::invalid_argument("train: need at least two training videos");

  TrainResult result;
  result.params = init_params(cfg.net, cfg.seed);
  if (byol) result.target = result.params;

  const std::size_t bpe = batches_per_epoch(pool.size(), cfg.batch_size);
  const std::size_t per_batch = std::min(cfg.batch_size, pool.size());
  OptimState opt;
  opt.total_steps = static_cast<std::uint64_t>(cfg.epochs * bpe);
  opt.base_lr = cfg.lr;
  opt.warmup_steps = static_cast<std::uint64_t>(std::min(cfg.warmup_epochs, cfg.epochs) * bpe);
  opt.weight_decay = cfg.weight_decay;
  opt.momentum = cfg.momentum;
  opt.tau_base = cfg.tau_base;
  opt.lars = cfg.lars;

  std::uint64_t step = 0;
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = pool;
    Rng shuffle(cfg.seed, {key_of("shuffle"), epoch});
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(i)))]);
    }
    for (std::uint64_t b = 0; b < bpe; ++b) {
      const double u = cfg.freeze_random_diff ? kForcedHighDraw
                                              : schedule_stream(cfg.seed, epoch, b).uniform();
      const ViewPairSpec pair = select_pair(cfg.schedule, epoch, u);
      std::vector<std::size_t> items(order.begin() + static_cast<std::ptrdiff_t>(b * per_batch),
                                     order.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_batch));
      const auto [xa, xb] = make_views(ds, items, cfg, pair, epoch, b);

      StepLoss sl = objective_step(cfg.objective, result.params,
                                   result.target ? &*result.target : nullptr, cfg.net, xa, xb,
                                   cfg.loss);
      if (!std::isfinite(sl.report.total)) throw NonFiniteLoss(step, sl.report.total);

      StepLog entry;
      entry.step = step;
      entry.epoch = epoch;
      entry.pair = pair;
      entry.lr = opt.current_lr();
      entry.tau = byol ? opt.current_tau() : 1.0;
      entry.loss = sl.report.total;
      entry.terms = sl.report.terms;

      sgd_step(result.params, sl.grads, opt);
      if (byol) ema_update(result.params, *result.target, entry.tau);

      if (on_step) on_step(entry);
      result.log.push_back(std::move(entry));
      ++step;
    }
  }
  return result;
}

}  // namespace vididi
