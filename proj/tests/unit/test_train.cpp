#include <doctest.h>

#include "../common/testing.hpp"
#include "vididi/commands.hpp"
#include "vididi/optim.hpp"

using namespace vididi;

namespace {

const SynthDataset& dataset() {
  static const SynthDataset ds = [] {
    GenerateOptions o;
    o.n_videos = 64;
    o.frames = 32;
    o.g_values = default_g_values(4, o.frames, o.height);
    o.seed = 11;
    return generate(o);
  }();
  return ds;
}

ExperimentConfig config(Objective objective, std::size_t epochs) {
  ExperimentConfig cfg;
  cfg.objective = objective;
  cfg.epochs = epochs;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("zero epochs leave the initialization") {
  for (Objective obj : {Objective::SimCLR, Objective::BYOL, Objective::VICReg}) {
    const ExperimentConfig cfg = config(obj, 0);
    const TrainResult r = run_training(dataset(), cfg);
    CHECK(r.log.empty());
    CHECK(r.params == init_params(cfg.to_train_config(3).net, cfg.seed));
    CHECK(r.target.has_value() == (obj == Objective::BYOL));
  }
}

TEST_CASE("training logs are bit-identical for a seed and differ across seeds") {
  ExperimentConfig cfg = config(Objective::VICReg, 2);
  const TrainResult a = run_training(dataset(), cfg);
  cfg.workers = 4;
  const TrainResult b = run_training(dataset(), cfg);
  CHECK(a.log == b.log);
  CHECK(a.params == b.params);
  cfg.seed = 4;
  CHECK_FALSE(run_training(dataset(), cfg).log == a.log);
}

TEST_CASE("loss falls over a seeded 200-step run for every objective") {
  for (Objective obj : {Objective::SimCLR, Objective::BYOL, Objective::VICReg}) {
    const TrainResult r = run_training(dataset(), config(obj, 100));
    REQUIRE(r.log.size() == 200);
    CAPTURE(objective_name(obj));
    CHECK(r.log.back().loss < r.log.front().loss);
  }
}

TEST_CASE("step log carries the schedule and optimizer state") {
  ExperimentConfig cfg = config(Objective::BYOL, 4);
  cfg.freeze_random_diff = true;
  const TrainResult r = run_training(dataset(), cfg);
  REQUIRE(r.log.size() == 8);
  const ViewPairSpec cycle[] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
  const TrainConfig tc = cfg.to_train_config(3);
  for (const StepLog& e : r.log) {
    CHECK(e.epoch == e.step / 2);
    CHECK(e.pair == cycle[e.epoch % 4]);
    // Warmup is clamped to the run length.
    CHECK(e.lr == lr_at(e.step, 8, tc.lr, std::min<std::size_t>(tc.warmup_epochs, 4) * 2));
    CHECK(e.tau == tau_at(e.step, 8, 0.99));
    CHECK(e.terms.count("alignment") == 1);
  }
  CHECK(tc.warmup_epochs == 10);
  CHECK(tc.lr == cfg.base_lr * cfg.lr_scale);
}

TEST_CASE("byol gradients never reach the target") {
  const ExperimentConfig cfg = config(Objective::BYOL, 1);
  const TrainConfig tc = cfg.to_train_config(3);
  ParamSet online = init_params(tc.net, 1);
  const ParamSet target_before = init_params(tc.net, 2);
  ParamSet target = target_before;
  const std::vector<std::size_t> items{0, 2, 4, 6};
  auto [xa, xb] = make_views(dataset(), items, tc, {1, 0}, 0, 0);
  const StepLoss sl = objective_step(Objective::BYOL, online, &target, tc.net, xa, xb, tc.loss);
  OptimState st;
  sgd_step(online, sl.grads, st, 0.1);
  CHECK(target == target_before);
  CHECK_FALSE(online == init_params(tc.net, 1));

  // With tau = 1 the EMA is a no-op, so training leaves the target at its copy.
  ExperimentConfig frozen = config(Objective::BYOL, 2);
  frozen.tau_base = 1.0;
  const TrainResult r = run_training(dataset(), frozen);
  REQUIRE(r.target.has_value());
  CHECK(*r.target == init_params(frozen.to_train_config(3).net, frozen.seed));
  CHECK_FALSE(r.params == *r.target);
}

TEST_CASE("views are augmented, differentiated and truncated to T") {
  const ExperimentConfig cfg = config(Objective::SimCLR, 1);
  const TrainConfig tc = cfg.to_train_config(3);
  for (ViewPairSpec pair : legal_pairs()) {
    auto [xa, xb] = make_views(dataset(), {1, 3}, tc, pair, 5, 2);
    CHECK(xa.frames() == tc.clip_frames);
    CHECK(xb.frames() == tc.clip_frames);
    CHECK(xa[0].height() == 16);
    auto [ya, yb] = make_views(dataset(), {1, 3}, tc, pair, 5, 2);
    CHECK(xa[1] == ya[1]);
    CHECK(xb[0] == yb[0]);
  }
}

TEST_CASE("non-finite losses abort with the step index") {
  ExperimentConfig cfg = config(Objective::VICReg, 3);
  cfg.lr_scale = 1e300;
  cfg.lars = false;
  try {
    run_training(dataset(), cfg);
    FAIL("expected an abort");
  } catch (const NonFiniteLoss& e) {
    CHECK(e.step() >= 1);
    CHECK(std::string(e.what()).find(std::to_string(e.step())) != std::string::npos);
  }
}
