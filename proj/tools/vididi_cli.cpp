#include <CLI11.hpp>
#include <iostream>

#include "vididi/commands.hpp"

int main(int argc, char** argv) {
  using namespace vididi;
  CLI::App app{"Temporal-derivative views for self-supervised video learning on synthetic data"};
  app.require_subcommand(1);

  GenerateArgs gen;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Render a synthetic free-fall dataset");
  generate->add_option("--videos", gen.videos, "number of videos")->capture_default_str();
  generate->add_option("--g-classes", gen.g_classes, "gravity classes")->capture_default_str();
  generate->add_option("--bg-classes", gen.bg_classes, "background classes")->capture_default_str();
  generate->add_option("--frames", gen.frames, "frames per video")->capture_default_str();
  generate->add_option("--size", gen.size, "frame height and width")->capture_default_str();
  generate->add_option("--channels", gen.channels, "channels per frame")->capture_default_str();
  generate->add_option("--bg-contrast", gen.bg_contrast, "scale of background class differences")
      ->capture_default_str();
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "seed (falls back to VIDIDI_SEED)");
  generate->add_option("--out", gen.out, "output directory")->capture_default_str();
  generate->add_flag("--shortcut", gen.shortcut,
                     "background predicts gravity on train, mispredicts it on test");
  generate->add_option("--workers", gen.workers, "worker threads")->capture_default_str();

  TrainArgs tr;
  std::size_t tr_epochs = 0;
  std::uint64_t tr_seed = 0;
  auto* train = app.add_subcommand("train", "Pretrain an encoder");
  train->add_option("-c,--config", tr.config, "config file")->required();
  train->add_option("--override", tr.overrides, "key=value applied after the config file");
  auto* tr_epochs_opt = train->add_option("--epochs", tr_epochs, "epochs");
  auto* tr_seed_opt = train->add_option("--seed", tr_seed, "seed");
  train->add_flag("--freeze-random-diff", tr.freeze_random_diff,
                  "never take the random derivative increment");
  train->add_option("--out", tr.out, "run directory")->capture_default_str();

  EvalArgs ev;
  std::string ev_config;
  std::string ev_data;
  std::size_t ev_workers = 1;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with retrieval, silhouette and a linear probe");
  eval->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  auto* ev_config_opt = eval->add_option("-c,--config", ev_config, "config (default: next to checkpoint)");
  eval->add_option("--override", ev.overrides, "key=value applied after the config file");
  auto* ev_data_opt = eval->add_option("--data", ev_data, "dataset directory");
  eval->add_option("--labels", ev.labels, "dynamic or static")
      ->check(CLI::IsMember({"dynamic", "static"}))
      ->capture_default_str();
  eval->add_option("--out", ev.out, "report directory")->capture_default_str();
  eval->add_flag("--svg", ev.svg, "write a PCA scatter plot");
  auto* ev_workers_opt = eval->add_option("--workers", ev_workers, "worker threads");

  CompareArgs cmp;
  std::uint64_t cmp_seed = 0;
  auto* compare = app.add_subcommand("compare", "Train base and vididi schedules side by side");
  compare->add_option("-c,--config", cmp.config, "config file")->required();
  compare->add_option("--override", cmp.overrides, "key=value applied after the config file");
  compare->add_option("--seeds", cmp.seeds, "number of seeds")->capture_default_str();
  auto* cmp_seed_opt = compare->add_option("--seed", cmp_seed, "first seed");
  compare->add_option("--out", cmp.out, "report directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (generate->parsed()) {
    if (*gen_seed_opt) gen.seed = gen_seed;
    return cmd_generate(gen, std::cout, std::cerr);
  }
  if (train->parsed()) {
    if (*tr_epochs_opt) tr.epochs = tr_epochs;
    if (*tr_seed_opt) tr.seed = tr_seed;
    return cmd_train(tr, std::cout, std::cerr);
  }
  if (eval->parsed()) {
    if (*ev_config_opt) ev.config = ev_config;
    if (*ev_data_opt) ev.data = ev_data;
    if (*ev_workers_opt) ev.workers = ev_workers;
    return cmd_eval(ev, std::cout, std::cerr);
  }
  if (*cmp_seed_opt) cmp.seed = cmp_seed;
  return cmd_compare(cmp, std::cout, std::cerr);
}
