#include "vididi/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "vididi/parallel.hpp"

namespace vididi {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("VIDIDI_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("VIDIDI_SEED is not an integer: ") + s);
  return static_cast<std::uint64_t>(v);
}

ExperimentConfig base_config() {
  ExperimentConfig base;
  if (auto s = env_seed()) base.seed = *s;
  return base;
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

NetSpec spec_for(const ExperimentConfig& cfg, std::size_t channels) {
  return cfg.to_train_config(channels).net;
}

// Shared error mapping of all commands.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

LabeledEmbeddings embed_dataset(const SynthDataset& ds, const ParamSet& params,
                                const NetSpec& spec, const EmbedOptions& opts, LabelKind labels,
                                std::size_t workers) {
  const std::size_t n = ds.videos.size();
  std::vector<Eigen::VectorXd> rows(n);
  parallel_for(n, workers, [&](std::size_t i) {
    EmbedOptions o = opts;
    o.seed = opts.seed + i;
    rows[i] = embed_video(ds.videos[i], params, spec, o);
  });
  LabeledEmbeddings e;
  e.vectors.resize(static_cast<Eigen::Index>(n), n ? rows[0].size() : 0);
  for (std::size_t i = 0; i < n; ++i) {
    e.vectors.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    const VideoMeta& m = ds.meta[i];
    e.labels.push_back(labels == LabelKind::Dynamic ? m.dynamic_label : m.static_label);
    e.split.push_back(m.split);
    e.ids.push_back(m.id);
  }
  return e;
}

EvalReport evaluate_embeddings(const LabeledEmbeddings& all, const std::vector<std::size_t>& ks,
                               const ProbeOptions& probe, const std::string& label_name) {
  const LabeledEmbeddings db = all.subset("train");
  const LabeledEmbeddings queries = all.subset("test");
  if (db.size() == 0 || queries.size() == 0) {
    throw std::runtime_error("evaluation needs both train and test videos");
  }
  EvalReport r;
  r.labels = label_name;
  r.queries = queries.size();
  r.database = db.size();
  r.dim = static_cast<std::size_t>(all.vectors.cols());
  r.recall = knn_recall(db, queries, ks);
  r.silhouette = silhouette(all);
  r.probe_accuracy = linear_probe(db, queries, probe);
  return r;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream s;
  s << "labels=" << report.labels << '\n';
  s << "queries=" << report.queries << '\n';
  s << "database=" << report.database << '\n';
  s << "dim=" << report.dim << '\n';
  for (const auto& [k, v] : report.recall) s << "recall@" << k << '=' << fmt(v) << '\n';
  s << "silhouette=" << fmt(report.silhouette) << '\n';
  s << "probe_accuracy=" << fmt(report.probe_accuracy) << '\n';
  return s.str();
}

TrainResult run_training(const SynthDataset& ds, const ExperimentConfig& cfg,
                         const StepCallback& on_step) {
  if (ds.videos.empty()) throw std::runtime_error("dataset is empty");
  return train(ds, cfg.to_train_config(ds.videos.front().channels()), on_step);
}

std::string format_train_log(const std::vector<StepLog>& log) {
  std::set<std::string> term_names;
  for (const auto& e : log) {
    for (const auto& [name, v] : e.terms) term_names.insert(name);
  }
  std::ostringstream s;
  s << "step,epoch,order_a,order_b,lr,tau,loss";
  for (const auto& name : term_names) s << ',' << name;
  s << '\n';
  for (const auto& e : log) {
    s << e.step << ',' << e.epoch << ',' << e.pair.order_a << ',' << e.pair.order_b << ','
      << fmt(e.lr) << ',' << fmt(e.tau) << ',' << fmt(e.loss);
    for (const auto& name : term_names) {
      auto it = e.terms.find(name);
      s << ',' << (it == e.terms.end() ? std::string() : fmt(it->second));
    }
    s << '\n';
  }
  return s.str();
}

std::vector<StoredTensor> checkpoint_tensors(const TrainResult& result) {
  std::vector<StoredTensor> out = to_stored(result.params, "online.");
  if (result.target) {
    auto t = to_stored(*result.target, "target.");
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

std::vector<CompareRow> run_compare(const SynthDataset& ds, const ExperimentConfig& cfg,
                                    std::size_t seeds) {
  if (seeds == 0) throw ConfigError("--seeds must be >= 1");
  std::vector<CompareRow> rows;
  const std::size_t channels = ds.videos.empty() ? 0 : ds.videos.front().channels();
  for (std::size_t s = 0; s < seeds; ++s) {
    for (SchedulePolicy policy : {SchedulePolicy::Base, SchedulePolicy::ViDiDi}) {
      ExperimentConfig run = cfg;
      run.seed = cfg.seed + s;
      run.schedule = policy;
      const TrainResult result = run_training(ds, run);
      const NetSpec spec = spec_for(run, channels);
      const EmbedOptions opts = run.embed_options();
      CompareRow row;
      row.schedule = std::string(policy_name(policy));
      row.seed = run.seed;
      const LabeledEmbeddings dyn =
          embed_dataset(ds, result.params, spec, opts, LabelKind::Dynamic, run.eval.workers);
      LabeledEmbeddings stat = dyn;
      for (std::size_t i = 0; i < ds.meta.size(); ++i) stat.labels[i] = ds.meta[i].static_label;
      row.dynamic_recall1 = knn_recall(dyn.subset("train"), dyn.subset("test"), {1}).at(1);
      row.static_recall1 = knn_recall(stat.subset("train"), stat.subset("test"), {1}).at(1);
      rows.push_back(row);
    }
  }
  return rows;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
  std::ostringstream s;
  s << "schedule,seed,dynamic_recall1,static_recall1\n";
  for (const auto& r : rows) {
    s << r.schedule << ',' << r.seed << ',' << fmt(r.dynamic_recall1) << ','
      << fmt(r.static_recall1) << '\n';
  }
  s << '\n';
  for (const char* schedule : {"base", "vididi"}) {
    std::vector<double> dyn;
    std::vector<double> stat;
    for (const auto& r : rows) {
      if (r.schedule != schedule) continue;
      dyn.push_back(r.dynamic_recall1);
      stat.push_back(r.static_recall1);
    }
    const MeanSd d = mean_sd(dyn);
    const MeanSd st = mean_sd(stat);
    s << schedule << " dynamic_recall1 " << fmt_short(d.mean) << "±" << fmt_short(d.sd)
      << "  static_recall1 " << fmt_short(st.mean) << "±" << fmt_short(st.sd) << '\n';
  }
  return s.str();
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GenerateOptions opts;
    opts.n_videos = args.videos;
    opts.frames = args.frames;
    opts.height = args.size;
    opts.width = args.size;
    opts.channels = args.channels;
    opts.bg_classes = args.bg_classes;
    opts.background_contrast = args.bg_contrast;
    opts.seed = args.seed ? *args.seed : env_seed().value_or(0);
    opts.shortcut = args.shortcut;
    opts.workers = std::max<std::size_t>(1, args.workers);
    SynthDataset ds;
    try {
      if (args.channels == 0) throw std::invalid_argument("--channels must be >= 1");
      if (!(args.bg_contrast >= 0.0)) throw std::invalid_argument("--bg-contrast must be >= 0");
      opts.g_values = default_g_values(args.g_classes, args.frames, args.size, opts.radius);
      ds = generate(opts);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    make_dir(args.out);
    save_dataset(ds, args.out);
    std::size_t train = ds.indices_of_split("train").size();
    std::size_t clipped = 0;
    for (const auto& m : ds.meta) clipped += m.clipped ? 1 : 0;
    out << "wrote " << ds.videos.size() << " videos to " << args.out.string() << '\n';
    out << "frames=" << args.frames << " size=" << args.size << " channels=" << args.channels
        << " seed=" << opts.seed << '\n';
    out << "g_classes=" << ds.g_values.size() << " bg_classes=" << ds.bg_classes
        << " shortcut=" << (ds.shortcut ? "true" : "false") << '\n';
    out << "g_values=";
    for (std::size_t i = 0; i < ds.g_values.size(); ++i) out << (i ? "," : "") << ds.g_values[i];
    out << '\n';
    out << "train=" << train << " test=" << ds.videos.size() - train << " clipped=" << clipped
        << '\n';
    return 0;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::string> overrides = args.overrides;
    if (args.epochs) overrides.push_back("train.epochs=" + std::to_string(*args.epochs));
    if (args.seed) overrides.push_back("train.seed=" + std::to_string(*args.seed));
    if (args.freeze_random_diff) overrides.push_back("train.freeze_random_diff=true");
    const ExperimentConfig cfg = load_config(args.config, overrides, base_config());
    const SynthDataset ds = load_dataset(cfg.dataset_path, cfg.workers);
    TrainResult result;
    try {
      result = run_training(ds, cfg);
    } catch (const NonFiniteLoss& e) {
      err << "error: non-finite loss at step " << e.step() << '\n';
      return 1;
    }
    make_dir(args.out);
    write_tensor_file(args.out / "checkpoint.vddi", checkpoint_tensors(result));
    write_text(args.out / "train_log.csv", format_train_log(result.log));
    write_text(args.out / "config.toml", serialize_config(cfg));
    out << "trained " << objective_name(cfg.objective) << " schedule="
        << policy_name(cfg.schedule) << " steps=" << result.log.size();
    if (!result.log.empty()) out << " final_loss=" << fmt(result.log.back().loss);
    out << '\n' << "wrote " << (args.out / "checkpoint.vddi").string() << '\n';
    return 0;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LabelKind kind;
    if (args.labels == "dynamic") {
      kind = LabelKind::Dynamic;
    } else if (args.labels == "static") {
      kind = LabelKind::Static;
    } else {
      throw ConfigError("--labels must be dynamic or static");
    }
    const std::filesystem::path config_path =
        args.config ? *args.config : args.checkpoint.parent_path() / "config.toml";
    std::vector<std::string> overrides = args.overrides;
    if (args.workers) overrides.push_back("eval.workers=" + std::to_string(*args.workers));
    ExperimentConfig cfg = load_config(config_path, overrides, base_config());
    if (args.data) cfg.dataset_path = args.data->string();
    const SynthDataset ds = load_dataset(cfg.dataset_path, cfg.eval.workers);
    if (ds.videos.empty()) throw std::runtime_error("dataset is empty");

    const auto tensors = read_tensor_file(args.checkpoint);
    const ParamSet params = params_from_stored(tensors, "online.");
    const NetSpec spec = spec_for(cfg, ds.videos.front().channels());
    const ParamSet expected = init_params(spec, 0);
    bool compatible = expected.same_layout(params);
    if (!compatible) {
      throw std::runtime_error("checkpoint does not match the dataset/config dimensions (expected " +
                               std::to_string(expected.parameter_count()) + " parameters, got " +
                               std::to_string(params.parameter_count()) + ")");
    }

    const LabeledEmbeddings emb =
        embed_dataset(ds, params, spec, cfg.embed_options(), kind, cfg.eval.workers);
    ProbeOptions probe;
    probe.epochs = cfg.eval.probe_epochs;
    probe.lr = cfg.eval.probe_lr;
    probe.seed = cfg.eval.seed;
    const EvalReport report = evaluate_embeddings(emb, cfg.eval.ks, probe, args.labels);

    make_dir(args.out);
    const std::string text = format_report(report);
    write_text(args.out / "report.txt", text);
    write_embeddings_csv(emb, args.out / "embeddings.csv");
    if (args.svg) write_scatter_svg(pca2d(emb), emb.labels, args.out / "scatter.svg");
    out << text;
    return 0;
  });
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::string> overrides = args.overrides;
    if (args.seed) overrides.push_back("train.seed=" + std::to_string(*args.seed));
    const ExperimentConfig cfg = load_config(args.config, overrides, base_config());
    const SynthDataset ds = load_dataset(cfg.dataset_path, cfg.workers);
    std::vector<CompareRow> rows;
    try {
      rows = run_compare(ds, cfg, args.seeds);
    } catch (const NonFiniteLoss& e) {
      err << "error: non-finite loss at step " << e.step() << '\n';
      return 1;
    }
    const std::string text = format_compare(rows);
    make_dir(args.out);
    write_text(args.out / "compare.txt", text);
    out << text;
    return 0;
  });
}

}  // namespace vididi
