// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "../common/eval_oracles.hpp"
#include "../common/gradcheck.hpp"
#include "../common/testing.hpp"
#include "vididi/commands.hpp"
#include "vididi/objectives.hpp"
#include "vididi/optim.hpp"
#include "vididi/schedule.hpp"

using namespace vididi;
namespace vt = vididi::testing;

namespace {

// Collects failed checks; the first few are kept for the report line.
struct Checks {
  std::size_t failed = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failed;
    if (notes.size() < 3) notes.push_back(what);
  }
  std::string summary() const {
    std::string s = std::to_string(failed) + " failed";
    for (const auto& n : notes) s += "; " + n;
    return s;
  }
};

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome finish(const Checks& c, const std::string& ok_detail) {
  return {c.failed == 0, c.failed == 0 ? ok_detail : c.summary()};
}

// 1. Finite-difference algebra on random clips.
Outcome derivative_algebra() {
  Checks c;
  Rng rng(101);
  double worst_lin = 0.0;
  double worst_taylor = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t C = 1 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    const std::size_t T = 3 + static_cast<std::size_t>(rng.uniform_int(0, 9));
    const std::size_t H = 1 + static_cast<std::size_t>(rng.uniform_int(0, 7));
    const std::size_t W = 1 + static_cast<std::size_t>(rng.uniform_int(0, 7));
    const VideoTensor x = vt::random_clip(rng, C, T, H, W);
    const VideoTensor y = vt::random_clip(rng, C, T, H, W);
    const double a = rng.normal();
    const double b = rng.normal();
    const std::string tag = " (clip " + std::to_string(trial) + ")";

    // Elementwise definitions.
    const VideoTensor d1 = diff1(x);
    const VideoTensor d2 = diff2(x);
    bool def_ok = d1.frames() == T - 1 && d2.frames() == T - 2;
    for (std::size_t ch = 0; def_ok && ch < C; ++ch) {
      for (std::size_t t = 0; t + 1 < T; ++t) {
        for (std::size_t r = 0; r < H; ++r) {
          for (std::size_t q = 0; q < W; ++q) {
            def_ok = def_ok && d1.at(ch, t, r, q) == x.at(ch, t + 1, r, q) - x.at(ch, t, r, q);
          }
        }
      }
    }
    c.expect(def_ok, "first difference definition" + tag);

    for (int order : {1, 2}) {
      const VideoTensor lhs = differentiate(a * x + b * y, order);
      const VideoTensor rhs = a * differentiate(x, order) + b * differentiate(y, order);
      worst_lin = std::max(worst_lin, vt::max_abs_diff(lhs, rhs));
    }
    c.expect(d2 == diff1(d1), "second difference is not the iterated first" + tag);

    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(T) - 1));
    const VideoTensor still = broadcast_frames(x.frame(pick), T);
    const VideoTensor s1 = diff1(still);
    const VideoTensor s2 = diff2(still);
    bool zero = true;
    for (double v : s1.data()) zero = zero && v == 0.0;
    for (double v : s2.data()) zero = zero && v == 0.0;
    c.expect(zero, "static clip not annihilated" + tag);

    const VideoTensor qx = vt::quantized_clip(rng, C, T, H, W);
    for (std::size_t n = 0; n + 2 < T; ++n) {
      c.expect(taylor_reconstruct(x, n, n) == x.frame(n), "reconstruction at t=n" + tag);
      for (std::size_t t = n + 1; t <= n + 2; ++t) {
        worst_taylor = std::max(worst_taylor, vt::max_abs_diff(taylor_reconstruct(x, n, t), x.frame(t)));
      }
      for (std::size_t t = n; t <= n + 2; ++t) {
        c.expect(taylor_reconstruct(qx, n, t) == qx.frame(t), "quantized reconstruction" + tag);
      }
    }
  }
  c.expect(worst_lin <= 1e-12, "linearity error " + num(worst_lin));
  c.expect(worst_taylor <= 1e-12, "reconstruction error " + num(worst_taylor));
  return finish(c, "100 clips, linearity " + num(worst_lin) + ", reconstruction " + num(worst_taylor));
}

// Alternation table written out independently of the implementation.
ViewPairSpec expected_pair(SchedulePolicy policy, std::uint64_t epoch, bool increment) {
  static const ViewPairSpec cycle[] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
  static const ViewPairSpec reverse[] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  ViewPairSpec p = policy == SchedulePolicy::ViDiDi ? cycle[epoch % 4] : reverse[epoch % 4];
  if (increment) {
    ++p.order_a;
    ++p.order_b;
  }
  return p;
}

// 2. Schedule table, increment frequency and legality.
Outcome schedule_conformance() {
  Checks c;
  for (SchedulePolicy policy : {SchedulePolicy::ViDiDi, SchedulePolicy::Reverse}) {
    for (std::uint64_t e = 0; e < 400; ++e) {
      c.expect(select_pair(policy, e, kForcedLowDraw) == expected_pair(policy, e, true),
               std::string(policy_name(policy)) + " low draw at epoch " + std::to_string(e));
      c.expect(select_pair(policy, e, kForcedHighDraw) == expected_pair(policy, e, false),
               std::string(policy_name(policy)) + " high draw at epoch " + std::to_string(e));
    }
  }

  // 4000 batches through the training stream; each draw is one Bernoulli(0.5).
  std::uint64_t incremented = 0;
  for (std::uint64_t k = 0; k < 4000; ++k) {
    Rng stream = schedule_stream(2024, k, 0);
    const ViewPairSpec p = select_pair(SchedulePolicy::ViDiDi, k, stream);
    if (p != expected_pair(SchedulePolicy::ViDiDi, k, false)) {
      c.expect(p == expected_pair(SchedulePolicy::ViDiDi, k, true), "pair outside both branches");
      ++incremented;
    }
  }
  const double z = (static_cast<double>(incremented) - 2000.0) / std::sqrt(4000 * 0.25);
  c.expect(std::abs(z) <= 3.0, "increment frequency z=" + num(z));

  Rng rng(7);
  for (SchedulePolicy policy : all_policies()) {
    for (std::uint64_t e = 0; e < 400; ++e) {
      for (double u : {kForcedLowDraw, kForcedHighDraw, rng.uniform()}) {
        c.expect(is_legal(select_pair(policy, e, u)),
                 std::string(policy_name(policy)) + " illegal pair");
      }
    }
  }
  return finish(c, "800 table entries per policy, increments " + std::to_string(incremented) +
                       "/4000 (z=" + num(z) + "), 9 policies legal");
}

// 3. Loss values on worked examples.
Outcome loss_oracles() {
  Checks c;
  Eigen::MatrixXd eye(2, 2);
  eye << 1, 0, 0, 1;
  const double nce = infonce_loss(eye, eye, 0.1).total;
  // Row softmax of [[10, 0], [0, 10]] at the diagonal.
  const double oracle = -std::log(std::exp(10.0) / (std::exp(10.0) + std::exp(0.0)));
  c.expect(std::abs(nce - oracle) <= 1e-9 * oracle, "infonce " + num(nce) + " vs " + num(oracle));
  c.expect(std::abs(nce - 4.5398e-5) <= 5e-9, "infonce " + num(nce) + " vs 4.5398e-5");

  Eigen::MatrixXd z(2, 2);
  z << 1, 0, -1, 0;
  VicRegWeights w;
  c.expect(w.lambda == 1.0 && w.mu == 1.0 && w.nu == 0.05 && w.gamma == 1.0 && w.eps == 1e-4,
           "vicreg default weights");
  // Column 0 has std sqrt(2 + eps); column 1 is constant, so only its hinge fires.
  const double vic = vicreg_loss(z, z, w).total;
  const double vic_oracle = 0.5 * (std::max(0.0, 1.0 - std::sqrt(2.0 + 1e-4)) + (1.0 - std::sqrt(1e-4))) * 2.0;
  c.expect(vic == 0.99, "vicreg " + num(vic));
  c.expect(vic == vic_oracle, "vicreg oracle " + num(vic_oracle));

  Rng rng(3);
  Eigen::MatrixXd p(4, 5);
  for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = rng.normal();
  const double aligned = byol_loss(p, 3.0 * p).total;
  const double anti = byol_loss(p, -0.5 * p).total;
  c.expect(std::abs(aligned) <= 1e-15, "byol aligned " + num(aligned));
  c.expect(std::abs(anti - 2.0) <= 1e-15, "byol antiparallel " + num(anti));
  return finish(c, "infonce " + num(nce) + ", vicreg " + num(vic) + ", byol " + num(aligned) +
                       "/" + num(anti));
}

// 4. Analytic and backprop gradients against central differences.
Outcome gradient_checks() {
  Checks c;
  double worst_loss = 0.0;
  double worst_net = 0.0;
  for (Objective obj : {Objective::SimCLR, Objective::BYOL, Objective::VICReg}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed, {key_of("loss-grad")});
      const Eigen::Index B = 2 + static_cast<Eigen::Index>(rng.uniform_int(0, 6));
      const Eigen::Index D = 2 + static_cast<Eigen::Index>(rng.uniform_int(0, 14));
      Eigen::MatrixXd a(B, D), b(B, D);
      for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = 0.6 * rng.normal();
      for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = 0.6 * rng.normal();
      double err = 0.0;
      switch (obj) {
        case Objective::SimCLR:
          err = vt::matrix_grad_error([&](const Eigen::MatrixXd& x) { return infonce_loss(x, b, 0.1).total; },
                                      a, infonce_loss(a, b, 0.1).grad_a, 1e-6);
          break;
        case Objective::BYOL:
          err = vt::matrix_grad_error([&](const Eigen::MatrixXd& x) { return byol_loss(x, b).total; }, a,
                                      byol_loss(a, b).grad_a, 1e-6);
          break;
        case Objective::VICReg:
          err = vt::matrix_grad_error([&](const Eigen::MatrixXd& x) { return vicreg_loss(x, b).total; },
                                      a, vicreg_loss(a, b).grad_a, 1e-6);
          break;
      }
      worst_loss = std::max(worst_loss, err);
      const double net = vt::end_to_end_grad_error(obj, vt::tiny_spec(obj), seed);
      worst_net = std::max(worst_net, net);
      c.expect(err < 1e-4, std::string(objective_name(obj)) + " loss gradient " + num(err));
      c.expect(net < 1e-4, std::string(objective_name(obj)) + " network gradient " + num(net) +
                               " seed " + std::to_string(seed));
    }
  }
  return finish(c, "20 seeds x 3 objectives, loss " + num(worst_loss) + ", network " + num(worst_net));
}

// 5. Schedule endpoints and target isolation.
Outcome optimizer_formulas() {
  Checks c;
  const double eta = 1.2 * 0.003;
  for (std::uint64_t K : {1u, 80u, 1000u}) {
    for (std::uint64_t warm : {0u, 10u}) {
      if (warm >= K) continue;
      c.expect(std::abs(lr_at(warm, K, eta, warm) - eta) <= 1e-12, "lr after warmup");
      c.expect(std::abs(lr_at(K, K, eta, warm)) <= 1e-12, "lr at K");
    }
    c.expect(std::abs(tau_at(0, K, 0.99) - 0.99) <= 1e-12, "tau at 0");
    c.expect(std::abs(tau_at(K, K, 0.99) - 1.0) <= 1e-12, "tau at K");
  }

  const NetSpec spec = vt::tiny_spec(Objective::BYOL);
  ParamSet online = init_params(spec, 1);
  const ParamSet target_before = init_params(spec, 2);
  ParamSet target = target_before;
  Rng rng(5);
  const ClipBatch xa = vt::random_batch(rng, 4, spec);
  const ClipBatch xb = vt::random_batch(rng, 4, spec);
  const StepLoss step = objective_step(Objective::BYOL, online, &target, spec, xa, xb, LossParams{});
  OptimState st;
  const ParamSet online_before = online;
  sgd_step(online, step.grads, st, 0.1);
  c.expect(!(online == online_before), "online unchanged by the step");
  c.expect(step.grads.same_layout(online), "gradients cover the online network only");
  double drift = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const std::string& name = target.tensor_at(t).name;
    drift = std::max(drift, (target.get(name) - target_before.get(name)).cwiseAbs().maxCoeff());
  }
  c.expect(target == target_before && drift == 0.0, "target moved by " + num(drift));
  return finish(c, "endpoints within 1e-12, target drift " + num(drift));
}

// 6. Retrieval and silhouette against oracles.
Outcome evaluation_oracles() {
  Checks c;
  Rng rng(11);
  const LabeledEmbeddings db = vt::blobs(rng, 120, 6, 4, 1.5);
  const LabeledEmbeddings q = vt::blobs(rng, 80, 6, 4, 1.5);
  const std::vector<std::size_t> ks{1, 5, 10, 20, 50};
  for (Distance d : {Distance::Cosine, Distance::Euclidean}) {
    const auto got = knn_recall(db, q, ks, d);
    const auto want = vt::brute_force_recall(db, q, ks, d);
    for (std::size_t k : ks) c.expect(got.at(k) == want.at(k), "recall@" + std::to_string(k));
  }
  const double sil = silhouette(vt::six_point_case());
  c.expect(std::abs(sil - 401.0 / 720.0) <= 1e-9, "silhouette " + num(sil));
  for (int trial = 0; trial < 50; ++trial) {
    const LabeledEmbeddings d = vt::blobs(rng, 40, 5, 3, 1.0);
    const LabeledEmbeddings dq = vt::blobs(rng, 20, 5, 3, 1.0);
    std::vector<std::size_t> all(40);
    for (std::size_t k = 0; k < 40; ++k) all[k] = k + 1;
    const auto r = knn_recall(d, dq, all);
    for (std::size_t k = 1; k < 40; ++k) {
      c.expect(r.at(k + 1) >= r.at(k), "recall not monotone in dataset " + std::to_string(trial));
    }
  }
  return finish(c, "200 points match, silhouette " + num(sil) + ", 50 monotone datasets");
}

// 7. Gravity from the rendered track.
Outcome gravity_recovery() {
  Checks c;
  GenerateOptions o;
  o.n_videos = 64;
  o.g_values = default_g_values(4, o.frames, o.height);
  o.seed = 17;
  const SynthDataset ds = generate(o);
  double worst = 0.0;
  for (std::size_t i = 0; i < ds.videos.size(); ++i) {
    const std::vector<double> track = track_sprite(ds.videos[i], background_of(ds, i));
    for (std::size_t t = 0; t + 2 < track.size(); ++t) {
      const double acc = track[t + 2] - 2.0 * track[t + 1] + track[t];
      worst = std::max(worst, std::abs(acc + ds.meta[i].latents.g));
    }
  }
  c.expect(worst <= 0.5, "worst error " + num(worst));
  return finish(c, "64 videos x 30 steps, worst error " + num(worst) + " px/frame^2");
}

// 8. Base against the alternating schedule on the shortcut split.
Outcome disentanglement() {
  GenerateOptions o;
  o.n_videos = 128;
  o.shortcut = true;
  o.g_values = default_g_values(4, o.frames, o.height);
  o.background_contrast = 0.3;
  o.seed = 1;
  o.workers = 4;
  const SynthDataset ds = generate(o);
  Checks c;
  bool any_higher = false;
  std::string detail;
  for (Objective obj : {Objective::SimCLR, Objective::BYOL, Objective::VICReg}) {
    ExperimentConfig cfg;
    cfg.objective = obj;
    cfg.epochs = 100;
    cfg.seed = 0;
    cfg.workers = 4;
    cfg.eval.workers = 4;
    const auto rows = run_compare(ds, cfg, 5);
    std::vector<double> base, vididi;
    for (const auto& r : rows) (r.schedule == "base" ? base : vididi).push_back(r.dynamic_recall1);
    const double mb = mean_sd(base).mean;
    const double mv = mean_sd(vididi).mean;
    any_higher = any_higher || mv > mb;
    c.expect(mv >= mb - 0.02, std::string(objective_name(obj)) + " lower by " + num(mb - mv));
    detail += std::string(detail.empty() ? "" : "; ") + std::string(objective_name(obj)) + " base " + num(mb) +
              " vididi " + num(mv);
  }
  c.expect(any_higher, "no objective improves");
  return {c.failed == 0, detail + (c.failed == 0 ? "" : "; " + c.summary())};
}

// 9. Bit-identical command outputs.
Outcome determinism() {
  Checks c;
  const auto dir = vt::temp_dir("acceptance_determinism");
  std::ostringstream out, err;
  GenerateArgs g;
  g.videos = 32;
  g.seed = 3;
  g.out = dir / "data1";
  c.expect(cmd_generate(g, out, err) == 0, "generate failed");
  g.out = dir / "data4";
  g.workers = 4;
  c.expect(cmd_generate(g, out, err) == 0, "generate failed");
  c.expect(slurp(dir / "data1" / "manifest.jsonl") == slurp(dir / "data4" / "manifest.jsonl"),
           "manifest differs across workers");
  for (std::size_t i = 0; i < 32; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "v%05zu", i);
    c.expect(slurp(dir / "data1" / name / "video.vddi") == slurp(dir / "data4" / name / "video.vddi"),
             std::string("video differs: ") + name);
  }

  std::ofstream(dir / "cfg.toml") << "[data]\npath = \"" << (dir / "data1").generic_string()
                                  << "\"\n[train]\nobjective = \"byol\"\nepochs = 4\nseed = 9\n";
  TrainArgs t;
  t.config = dir / "cfg.toml";
  const char* runs[] = {"run_a", "run_b", "run_w4"};
  for (const char* run : runs) {
    t.out = dir / run;
    if (std::string(run) == "run_w4") t.overrides = {"train.workers=4"};
    c.expect(cmd_train(t, out, err) == 0, std::string("train failed: ") + err.str());
  }
  for (const char* other : {"run_b", "run_w4"}) {
    c.expect(slurp(dir / "run_a" / "train_log.csv") == slurp(dir / other / "train_log.csv"),
             std::string("log differs: ") + other);
    c.expect(slurp(dir / "run_a" / "checkpoint.vddi") == slurp(dir / other / "checkpoint.vddi"),
             std::string("checkpoint differs: ") + other);
  }

  EvalArgs e;
  e.checkpoint = dir / "run_a" / "checkpoint.vddi";
  e.workers = 1;
  e.out = dir / "eval1";
  c.expect(cmd_eval(e, out, err) == 0, "eval failed");
  e.workers = 4;
  e.out = dir / "eval4";
  c.expect(cmd_eval(e, out, err) == 0, "eval failed");
  c.expect(slurp(dir / "eval1" / "report.txt") == slurp(dir / "eval4" / "report.txt"),
           "report differs across workers");
  c.expect(slurp(dir / "eval1" / "embeddings.csv") == slurp(dir / "eval4" / "embeddings.csv"),
           "embeddings differ across workers");
  return finish(c, "generate, train and eval outputs bit-identical");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "derivative algebra", 5, derivative_algebra},
      {2, "schedule conformance", 5, schedule_conformance},
      {3, "loss oracles", 1, loss_oracles},
      {4, "gradient checks", 60, gradient_checks},
      {5, "schedule and optimizer formulas", 1, optimizer_formulas},
      {6, "evaluation oracles", 10, evaluation_oracles},
      {7, "gravity recovery", 10, gravity_recovery},
      {8, "disentanglement on the shortcut split", 900, disentanglement},
      {9, "determinism", 120, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const Criterion& cr : criteria) {
    if (!selected.empty() && !selected.count(cr.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < cr.budget_seconds;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << cr.id << ": " << cr.name << " ("
              << o.detail << "; " << num(secs) << " s of " << cr.budget_seconds << " s"
              << (in_time ? "" : ", over budget") << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
