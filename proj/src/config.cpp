#include "vididi/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace vididi {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

std::string_view norm_name(NormKind n) {
  switch (n) {
    case NormKind::None: return "none";
    case NormKind::Layer: return "layer";
    case NormKind::Batch: return "batch";
  }
  return "?";
}

struct RawValue {
  std::string text;
  int line = 0;
};

// Field visitor shared by parsing and serialization.
template <typename Visitor>
void visit_fields(ExperimentConfig& c, Visitor& v) {
  v("data.path", c.dataset_path);

  v("train.objective", c.objective);
  v("train.schedule", c.schedule);
  v("train.clip_frames", c.clip_frames);
  v("train.stride", c.stride);
  v("train.epochs", c.epochs);
  v("train.batch_size", c.batch_size);
  v("train.seed", c.seed);
  v("train.freeze_random_diff", c.freeze_random_diff);
  v("train.workers", c.workers);

  v("optim.base_lr", c.base_lr);
  v("optim.lr_scale", c.lr_scale);
  v("optim.byol_warmup_epochs", c.byol_warmup_epochs);
  v("optim.weight_decay", c.weight_decay);
  v("optim.momentum", c.momentum);
  v("optim.lars", c.lars);
  v("optim.tau_base", c.tau_base);

  v("loss.alpha", c.loss.alpha);
  v("loss.lambda", c.loss.vicreg.lambda);
  v("loss.mu", c.loss.vicreg.mu);
  v("loss.nu", c.loss.vicreg.nu);
  v("loss.gamma", c.loss.vicreg.gamma);
  v("loss.eps", c.loss.vicreg.eps);

  v("augment.flip_prob", c.augment.flip_prob);
  v("augment.crop_scale", c.augment.crop_scale);
  v("augment.crop_aspect", c.augment.crop_aspect);
  v("augment.out_height", c.augment.out_height);
  v("augment.out_width", c.augment.out_width);
  v("augment.blur_prob", c.augment.blur_prob);
  v("augment.blur_sigma", c.augment.blur_sigma);
  v("augment.jitter_prob", c.augment.jitter_prob);
  v("augment.jitter_brightness", c.augment.jitter_brightness);
  v("augment.jitter_contrast", c.augment.jitter_contrast);
  v("augment.jitter_saturation", c.augment.jitter_saturation);
  v("augment.jitter_hue", c.augment.jitter_hue);
  v("augment.gray_prob", c.augment.gray_prob);
  v("augment.norm_mean", c.augment.norm_mean);
  v("augment.norm_std", c.augment.norm_std);

  v("net.encoder_hidden", c.net.encoder_hidden);
  v("net.feature_dim", c.net.feature_dim);
  v("net.projector_hidden", c.net.projector_hidden);
  v("net.projector_out", c.net.projector_out);
  v("net.predictor_hidden", c.net.predictor_hidden);
  v("net.predictor_out", c.net.predictor_out);
  v("net.activation", c.net.activation);
  v("net.encoder_norm", c.net.encoder_norm);
  v("net.head_norm", c.net.head_norm);

  v("eval.clips", c.eval.clips);
  v("eval.ks", c.eval.ks);
  v("eval.random_crop", c.eval.random_crop);
  v("eval.seed", c.eval.seed);
  v("eval.probe_epochs", c.eval.probe_epochs);
  v("eval.probe_lr", c.eval.probe_lr);
  v("eval.workers", c.eval.workers);
}

class Parser {
 public:
  Parser(std::string source, std::map<std::string, RawValue> values)
      : source_(std::move(source)), values_(std::move(values)) {}

  template <typename T>
  void operator()(const std::string& key, T& field) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    seen_.insert(key);
    current_ = &it->second;
    key_ = key;
    read(it->second.text, field);
  }

  void check_unknown() const {
    for (const auto& [key, raw] : values_) {
      if (!seen_.count(key)) throw ConfigError(where(raw.line) + "unknown key '" + key + "'");
    }
  }

 private:
  std::string where(int line) const {
    return line > 0 ? source_ + ":" + std::to_string(line) + ": " : std::string("--override: ");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(where(current_->line) + key_ + ": " + what);
  }

  std::string unquote(const std::string& s) const {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail("expected a quoted string");
    return s.substr(1, s.size() - 2);
  }

  std::vector<std::string> items(const std::string& s) const {
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail("expected an array [a, b, ...]");
    std::vector<std::string> out;
    const std::string inner = trim(std::string_view(s).substr(1, s.size() - 2));
    if (inner.empty()) return out;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  double number(const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail("expected a number, got '" + s + "'");
    }
    return v;
  }

  std::uint64_t count(const std::string& s) const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      fail("expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  void read(const std::string& s, std::string& f) { f = unquote(s); }
  void read(const std::string& s, double& f) { f = number(s); }
  void read(const std::string& s, std::size_t& f) { f = static_cast<std::size_t>(count(s)); }
  void read(const std::string& s, bool& f) {
    if (s == "true") {
      f = true;
    } else if (s == "false") {
      f = false;
    } else {
      fail("expected true or false, got '" + s + "'");
    }
  }
  void read(const std::string& s, std::pair<double, double>& f) {
    const auto v = items(s);
    if (v.size() != 2) fail("expected a two-element array");
    f = {number(v[0]), number(v[1])};
  }
  void read(const std::string& s, std::vector<double>& f) {
    f.clear();
    for (const auto& item : items(s)) f.push_back(number(item));
  }
  void read(const std::string& s, std::vector<std::size_t>& f) {
    f.clear();
    for (const auto& item : items(s)) f.push_back(static_cast<std::size_t>(count(item)));
  }
  void read(const std::string& s, Objective& f) {
    const auto o = parse_objective(unquote(s));
    if (!o) fail("expected one of simclr, byol, vicreg");
    f = *o;
  }
  void read(const std::string& s, SchedulePolicy& f) {
    const auto p = parse_policy(unquote(s));
    if (!p) {
      fail("expected one of vididi, base, random-1, random-12, reverse, sched-1, sched-1-mix, "
           "sched-12, sched-12-mix");
    }
    f = *p;
  }
  void read(const std::string& s, Activation& f) {
    const std::string name = unquote(s);
    for (Activation a : {Activation::ReLU, Activation::Tanh, Activation::Identity}) {
      if (activation_name(a) == name) {
        f = a;
        return;
      }
    }
    fail("expected relu, tanh or identity");
  }
  void read(const std::string& s, NormKind& f) {
    const std::string name = unquote(s);
    for (NormKind n : {NormKind::None, NormKind::Layer, NormKind::Batch}) {
      if (norm_name(n) == name) {
        f = n;
        return;
      }
    }
    fail("expected none, layer or batch");
  }

  std::string source_;
  std::map<std::string, RawValue> values_;
  std::set<std::string> seen_;
  const RawValue* current_ = nullptr;
  std::string key_;
};

class Writer {
 public:
  template <typename T>
  void operator()(const std::string& key, T& field) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != section_) {
      if (!section_.empty()) out_ << '\n';
      out_ << '[' << section << "]\n";
      section_ = section;
    }
    out_ << key.substr(dot + 1) << " = " << format(field) << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string format(const std::string& s) { return '"' + s + '"'; }
  static std::string format(double v) { return format_double(v); }
  static std::string format(std::size_t v) { return std::to_string(v); }
  static std::string format(bool v) { return v ? "true" : "false"; }
  static std::string format(const std::pair<double, double>& v) {
    return '[' + format_double(v.first) + ", " + format_double(v.second) + ']';
  }
  template <typename T>
  static std::string format(const std::vector<T>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += format(v[i]);
    }
    return s + ']';
  }
  static std::string format(Objective o) { return format(std::string(objective_name(o))); }
  static std::string format(SchedulePolicy p) { return format(std::string(policy_name(p))); }
  static std::string format(Activation a) { return format(std::string(activation_name(a))); }
  static std::string format(NormKind n) { return format(std::string(norm_name(n))); }

  std::ostringstream out_;
  std::string section_;
};

// Collects every known key so bare override keys can be resolved.
struct KeyCollector {
  std::vector<std::string> keys;
  template <typename T>
  void operator()(const std::string& key, T&) {
    keys.push_back(key);
  }
};

std::string quote_if_needed(const std::string& key, const std::string& value) {
  // Enum and string fields take bare words on the command line.
  static const std::set<std::string> kStringKeys{"data.path",        "train.objective",
                                                 "train.schedule",   "net.activation",
                                                 "net.encoder_norm", "net.head_norm"};
  if (kStringKeys.count(key) && (value.empty() || value.front() != '"')) return '"' + value + '"';
  return value;
}

}  // namespace

AugmentConfig ExperimentConfig::desk_augment() {
  AugmentConfig a;
  a.out_height = 16;
  a.out_width = 16;
  return a;
}

TrainConfig ExperimentConfig::to_train_config(std::size_t channels) const {
  TrainConfig t;
  t.objective = objective;
  t.schedule = schedule;
  t.clip_frames = clip_frames;
  t.stride = stride;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.seed = seed;
  t.augment = augment;
  t.net = net;
  t.net.in_channels = channels;
  t.net.in_height = augment.out_height;
  t.net.in_width = augment.out_width;
  t.net.with_predictor = objective == Objective::BYOL;
  t.lr = base_lr * lr_scale;
  t.warmup_epochs = objective == Objective::BYOL ? byol_warmup_epochs : 0;
  t.weight_decay = weight_decay;
  t.momentum = momentum;
  t.lars = lars;
  t.tau_base = tau_base;
  t.loss = loss;
  t.freeze_random_diff = freeze_random_diff;
  t.workers = workers;
  return t;
}

EmbedOptions ExperimentConfig::embed_options() const {
  EmbedOptions e;
  e.clip_frames = clip_frames;
  e.stride = stride;
  e.clips = eval.clips;
  e.out_height = augment.out_height;
  e.out_width = augment.out_width;
  e.norm_mean = augment.norm_mean;
  e.norm_std = augment.norm_std;
  e.random_crop = eval.random_crop;
  e.seed = eval.seed;
  return e;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!dataset_path.empty(), "data.path must not be empty");
  require(clip_frames >= 1, "train.clip_frames must be >= 1");
  require(stride >= 1, "train.stride must be >= 1");
  require(batch_size >= 2, "train.batch_size must be >= 2");
  require(workers >= 1, "train.workers must be >= 1");
  require(base_lr > 0.0, "optim.base_lr must be > 0");
  require(lr_scale > 0.0, "optim.lr_scale must be > 0");
  require(weight_decay >= 0.0, "optim.weight_decay must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "optim.momentum must be in [0,1)");
  require(tau_base >= 0.0 && tau_base <= 1.0, "optim.tau_base must be in [0,1]");
  require(loss.alpha > 0.0, "loss.alpha must be > 0");
  require(loss.vicreg.eps > 0.0, "loss.eps must be > 0");
  require(loss.vicreg.gamma >= 0.0, "loss.gamma must be >= 0");
  require(eval.clips >= 1, "eval.clips must be >= 1");
  require(!eval.ks.empty(), "eval.ks must not be empty");
  for (std::size_t k : eval.ks) require(k >= 1, "eval.ks entries must be >= 1");
  require(eval.workers >= 1, "eval.workers must be >= 1");
  require(eval.probe_lr > 0.0, "eval.probe_lr must be > 0");
  try {
    augment.validate();
    NetSpec n = net;
    n.in_channels = 1;
    n.in_height = augment.out_height;
    n.in_width = augment.out_width;
    n.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides,
                              const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  KeyCollector collector;
  visit_fields(cfg, collector);
  std::set<std::string> sections;
  for (const auto& k : collector.keys) sections.insert(k.substr(0, k.find('.')));

  std::map<std::string, RawValue> values;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty section name");
      if (!sections.count(section)) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' outside a section");
    }
    const std::string full = section + "." + key;
    if (values.count(full)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    values[full] = {value, line_no};
  }

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("--override '" + ov + "': expected key=value");
    std::string key = trim(std::string_view(ov).substr(0, eq));
    const std::string value = trim(std::string_view(ov).substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      std::vector<std::string> matches;
      for (const auto& k : collector.keys) {
        if (k.substr(k.find('.') + 1) == key) matches.push_back(k);
      }
      if (matches.size() != 1) {
        throw ConfigError("--override '" + ov + "': " +
                          (matches.empty() ? "unknown key" : "ambiguous key, use section.key"));
      }
      key = matches.front();
    }
    values[key] = {quote_if_needed(key, value), 0};
  }

  Parser parser(source, std::move(values));
  visit_fields(cfg, parser);
  parser.check_unknown();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides,
                             const ExperimentConfig& base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.string(), overrides, base);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  Writer w;
  visit_fields(copy, w);
  return w.str();
}

}  // namespace vididi
