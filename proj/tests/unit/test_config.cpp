#include <doctest.h>

#include <fstream>

#include "../common/testing.hpp"
#include "vididi/config.hpp"

using namespace vididi;

TEST_CASE("defaults carry the standard hyperparameters") {
  const ExperimentConfig cfg;
  CHECK(cfg.loss.alpha == 0.1);
  CHECK(cfg.loss.vicreg.lambda == 1.0);
  CHECK(cfg.loss.vicreg.mu == 1.0);
  CHECK(cfg.loss.vicreg.nu == 0.05);
  CHECK(cfg.loss.vicreg.gamma == 1.0);
  CHECK(cfg.loss.vicreg.eps == 1e-4);
  CHECK(cfg.weight_decay == 1e-6);
  CHECK(cfg.base_lr == 1.2);
  CHECK(cfg.clip_frames == 8);
  CHECK(cfg.stride == 3);
  CHECK(cfg.tau_base == 0.99);
  CHECK(cfg.byol_warmup_epochs == 10);
  CHECK(cfg.eval.clips == 10);
  CHECK(cfg.eval.ks == std::vector<std::size_t>{1, 5, 10});
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("serialize then parse is the identity") {
  ExperimentConfig cfg;
  cfg.dataset_path = "some dir/data";
  cfg.objective = Objective::BYOL;
  cfg.schedule = SchedulePolicy::Sched12Mix;
  cfg.lr_scale = 0.1 + 0.2;
  cfg.augment.crop_scale = {0.3, 0.9};
  cfg.net.encoder_hidden = {7, 5, 3};
  cfg.net.activation = Activation::Tanh;
  cfg.net.head_norm = NormKind::Batch;
  cfg.eval.ks = {1, 2};
  cfg.loss.vicreg.eps = 1.0 / 3.0;
  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config(text);
  CHECK(back == cfg);
  CHECK(serialize_config(back) == text);
  CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("partial files keep the remaining defaults and accept comments") {
  const ExperimentConfig cfg = parse_config(
      "# desk run\n[train]\nobjective = \"simclr\"  # trailing\nepochs = 7\n\n[net]\nencoder_hidden = [8]\n");
  CHECK(cfg.objective == Objective::SimCLR);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.net.encoder_hidden == std::vector<std::size_t>{8});
  CHECK(cfg.batch_size == ExperimentConfig{}.batch_size);
}

TEST_CASE("overrides accept bare and qualified keys") {
  const ExperimentConfig cfg =
      parse_config("[train]\nepochs = 7\n", "<t>", {"schedule=base", "train.epochs=9", "optim.lars=false"});
  CHECK(cfg.schedule == SchedulePolicy::Base);
  CHECK(cfg.epochs == 9);
  CHECK_FALSE(cfg.lars);
  // "seed" exists in two sections, so it must be qualified.
  CHECK_THROWS_AS(parse_config("", "<t>", {"seed=3"}), ConfigError);
  CHECK(parse_config("", "<t>", {"eval.seed=3"}).eval.seed == 3);
  CHECK_THROWS_WITH_AS(parse_config("", "<t>", {"noequals"}), doctest::Contains("--override"),
                       ConfigError);
}

TEST_CASE("errors carry the source line and field") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text, "cfg.toml");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[train]\nepochs = 3\nbatch_size = x\n").find("cfg.toml:3: train.batch_size") == 0);
  CHECK(message("[train]\nepochz = 3\n").find("cfg.toml:2:") == 0);
  CHECK(message("[train]\nepochz = 3\n").find("train.epochz") != std::string::npos);
  CHECK(message("epochs = 3\n").find("cfg.toml:1:") == 0);
  CHECK(message("[train]\nepochs = 3\nepochs = 4\n").find("cfg.toml:3:") == 0);
  CHECK(message("[nope]\n").find("cfg.toml:1:") == 0);
  CHECK(message("[train]\njust words\n").find("cfg.toml:2:") == 0);
  CHECK(message("[augment]\nflip_prob = 1.5\n").find("flip_prob") != std::string::npos);
  CHECK(message("[net]\nencoder_norm = \"batch\"\n").find("encoder_norm") != std::string::npos);
  CHECK(message("[optim]\nlr_scale = 0\n").find("optim.lr_scale") != std::string::npos);
  CHECK(message("[train]\nobjective = \"moco\"\n").find("cfg.toml:2: train.objective") == 0);
}

TEST_CASE("derived training settings") {
  ExperimentConfig cfg;
  cfg.objective = Objective::BYOL;
  const TrainConfig byol = cfg.to_train_config(3);
  CHECK(byol.lr == cfg.base_lr * cfg.lr_scale);
  CHECK(byol.warmup_epochs == 10);
  CHECK(byol.net.with_predictor);
  CHECK(byol.net.in_height == cfg.augment.out_height);
  cfg.objective = Objective::VICReg;
  const TrainConfig vic = cfg.to_train_config(1);
  CHECK(vic.warmup_epochs == 0);
  CHECK_FALSE(vic.net.with_predictor);
  CHECK(vic.net.in_channels == 1);
  const EmbedOptions e = cfg.embed_options();
  CHECK(e.clips == cfg.eval.clips);
  CHECK(e.out_height == cfg.augment.out_height);
}

TEST_CASE("load_config reads files and reports missing ones") {
  const auto dir = vididi::testing::temp_dir("config");
  std::ofstream(dir / "c.toml") << "[train]\nepochs = 5\n";
  CHECK(load_config(dir / "c.toml").epochs == 5);
  CHECK(load_config(dir / "c.toml", {"train.epochs=6"}).epochs == 6);
  ExperimentConfig base;
  base.seed = 42;
  CHECK(load_config(dir / "c.toml", {}, base).seed == 42);
  CHECK_THROWS_AS(load_config(dir / "missing.toml"), ConfigError);
}
