#include "vididi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vididi/rng.hpp"

namespace vididi {

LabeledEmbeddings LabeledEmbeddings::subset(const std::string& tag) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == tag) rows.push_back(static_cast<Eigen::Index>(i));
  }
  LabeledEmbeddings out;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), vectors.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    out.vectors.row(static_cast<Eigen::Index>(k)) = vectors.row(r);
    out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    out.split.push_back(split[static_cast<std::size_t>(r)]);
    out.ids.push_back(ids.empty() ? std::to_string(r) : ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

void LabeledEmbeddings::validate() const {
  if (static_cast<std::size_t>(vectors.rows()) != labels.size()) {
    throw std::invalid_argument("embeddings: label count does not match rows");
  }
  if (!split.empty() && split.size() != labels.size()) {
    throw std::invalid_argument("embeddings: split count does not match rows");
  }
  if (!ids.empty() && ids.size() != labels.size()) {
    throw std::invalid_argument("embeddings: id count does not match rows");
  }
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("embeddings: labels must be non-negative");
  }
}

std::vector<std::size_t> clip_starts(std::size_t video_frames, std::size_t clip_frames,
                                     std::size_t stride, std::size_t clips) {
  if (clips == 0 || clip_frames == 0 || stride == 0) {
    throw std::invalid_argument("clip_starts: clips, frames and stride must be >= 1");
  }
  const std::size_t span = window_span(clip_frames, stride);
  if (video_frames < span) {
    throw std::invalid_argument("embed_video: video has " + std::to_string(video_frames) +
                                " frames, clip needs " + std::to_string(span));
  }
  const std::size_t room = video_frames - span;
  std::vector<std::size_t> starts(clips);
  if (clips == 1) {
    starts[0] = room / 2;
    return starts;
  }
  for (std::size_t i = 0; i < clips; ++i) {
    starts[i] = static_cast<std::size_t>(
        std::lround(static_cast<double>(i) * static_cast<double>(room) / static_cast<double>(clips - 1)));
  }
  return starts;
}

Eigen::VectorXd embed_video(const VideoTensor& video, const ParamSet& params,
                            const NetSpec& spec, const EmbedOptions& opts) {
  const auto starts = clip_starts(video.frames(), opts.clip_frames, opts.stride, opts.clips);
  AugmentConfig crop_cfg;
  crop_cfg.out_height = opts.out_height;
  crop_cfg.out_width = opts.out_width;
  Rng rng(opts.seed, {key_of("embed")});

  std::vector<VideoTensor> clips;
  clips.reserve(starts.size());
  for (std::size_t start : starts) {
    VideoTensor clip = take_window(video, start, opts.clip_frames, opts.stride);
    const CropRect rect = opts.random_crop
                              ? sample_crop(clip.height(), clip.width(), crop_cfg, rng)
                              : center_crop(clip.height(), clip.width(), opts.out_height,
                                            opts.out_width);
    clip = crop_resize(clip, rect, opts.out_height, opts.out_width);
    clips.push_back(normalize(clip, opts.norm_mean, opts.norm_std));
  }
  const ForwardResult fr = forward(params, spec, ClipBatch(std::move(clips)), Head::Features);
  return fr.output.colwise().mean().transpose();
}

namespace {

Eigen::MatrixXd distances(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& db,
                          Distance distance) {
  if (distance == Distance::Cosine) {
    auto normalized = [](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd out = m;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double n = m.row(i).norm();
        if (n > 0.0) out.row(i) /= n;
      }
      return out;
    };
    return (1.0 - (normalized(queries) * normalized(db).transpose()).array()).matrix();
  }
  Eigen::MatrixXd d(queries.rows(), db.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    for (Eigen::Index j = 0; j < db.rows(); ++j) d(q, j) = (queries.row(q) - db.row(j)).norm();
  }
  return d;
}

}  // namespace

std::map<std::size_t, double> knn_recall(const LabeledEmbeddings& db,
                                         const LabeledEmbeddings& queries,
                                         const std::vector<std::size_t>& ks,
                                         Distance distance) {
  db.validate();
  queries.validate();
  if (db.size() == 0) throw std::invalid_argument("knn_recall: empty database");
  if (queries.size() == 0) throw std::invalid_argument("knn_recall: no queries");
  if (db.vectors.cols() != queries.vectors.cols()) {
    throw std::invalid_argument("knn_recall: dimension mismatch (" +
                                std::to_string(db.vectors.cols()) + " vs " +
                                std::to_string(queries.vectors.cols()) + ")");
  }
  const Eigen::MatrixXd d = distances(queries.vectors, db.vectors, distance);
  std::map<std::size_t, std::size_t> hits;
  for (std::size_t k : ks) hits[k] = 0;

  std::vector<std::size_t> order(db.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::iota(order.begin(), order.end(), 0);
    const auto row = static_cast<Eigen::Index>(q);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return d(row, static_cast<Eigen::Index>(a)) < d(row, static_cast<Eigen::Index>(b));
    });
    // Rank of the first same-label neighbour decides every k at once.
    std::size_t first_hit = order.size();
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (db.labels[order[r]] == queries.labels[q]) {
        first_hit = r;
        break;
      }
    }
    for (auto& [k, count] : hits) {
      if (first_hit < k) ++count;
    }
  }
  std::map<std::size_t, double> recall;
  for (const auto& [k, count] : hits) {
    recall[k] = static_cast<double>(count) / static_cast<double>(queries.size());
  }
  return recall;
}

double silhouette(const LabeledEmbeddings& embeddings) {
  embeddings.validate();
  const std::size_t n = embeddings.size();
  std::map<int, std::size_t> class_size;
  for (int l : embeddings.labels) ++class_size[l];
  if (class_size.size() < 2) throw std::invalid_argument("silhouette: need at least two classes");
  bool any_pair = false;
  for (const auto& [l, c] : class_size) any_pair = any_pair || c >= 2;
  if (!any_pair) throw std::invalid_argument("silhouette: every class is a singleton");

  const Eigen::MatrixXd& x = embeddings.vectors;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int li = embeddings.labels[i];
    if (class_size[li] < 2) continue;
    std::map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[embeddings.labels[j]] +=
          (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sum[li] / static_cast<double>(class_size[li] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, s] : sum) {
      if (l == li) continue;
      b = std::min(b, s / static_cast<double>(class_size[l]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double linear_probe(const LabeledEmbeddings& train, const LabeledEmbeddings& test,
                    const ProbeOptions& opts) {
  train.validate();
  test.validate();
  if (train.size() == 0 || test.size() == 0) throw std::invalid_argument("linear_probe: empty split");
  if (train.vectors.cols() != test.vectors.cols()) {
    throw std::invalid_argument("linear_probe: dimension mismatch");
  }
  int max_label = 0;
  for (int l : train.labels) max_label = std::max(max_label, l);
  for (int l : test.labels) max_label = std::max(max_label, l);
  const Eigen::Index K = max_label + 1;
  const Eigen::Index D = train.vectors.cols();
  const auto N = static_cast<double>(train.size());

  const Eigen::RowVectorXd mean = train.vectors.colwise().mean();
  Eigen::RowVectorXd scale =
      ((train.vectors.rowwise() - mean).colwise().squaredNorm() / N).array().sqrt();
  for (Eigen::Index j = 0; j < D; ++j) scale(j) = scale(j) > 1e-12 ? 1.0 / scale(j) : 1.0;
  auto standardize = [&](const Eigen::MatrixXd& m) {
    return Eigen::MatrixXd((m.rowwise() - mean).array().rowwise() * scale.array());
  };
  const Eigen::MatrixXd xtr = standardize(train.vectors);
  const Eigen::MatrixXd xte = standardize(test.vectors);

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(xtr.rows(), K);
  for (std::size_t i = 0; i < train.size(); ++i) onehot(static_cast<Eigen::Index>(i), train.labels[i]) = 1.0;

  Rng rng(opts.seed, {key_of("probe")});
  Eigen::MatrixXd W(D, K);
  for (Eigen::Index r = 0; r < D; ++r) {
    for (Eigen::Index c = 0; c < K; ++c) W(r, c) = 0.01 * rng.normal();
  }
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(K);

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    Eigen::MatrixXd logits = xtr * W;
    logits.rowwise() += b;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double m = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - m).exp().matrix();
      logits.row(i) /= logits.row(i).sum();
    }
    const Eigen::MatrixXd g = (logits - onehot) / N;
    W -= opts.lr * (xtr.transpose() * g + opts.weight_decay * W);
    b -= opts.lr * g.colwise().sum();
  }

  Eigen::MatrixXd scores = xte * W;
  scores.rowwise() += b;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index arg;
    scores.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

Eigen::MatrixXd pca2d(const LabeledEmbeddings& embeddings) {
  const Eigen::MatrixXd& x = embeddings.vectors;
  if (x.rows() < 2) throw std::invalid_argument("pca2d: need at least two points");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(x.rows(), 2);
  if (centered.cwiseAbs().maxCoeff() == 0.0) return coords;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::Index comps = std::min<Eigen::Index>(2, svd.matrixV().cols());
  coords.leftCols(comps) = centered * svd.matrixV().leftCols(comps);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    coords.col(c).cwiseAbs().maxCoeff(&arg);
    if (coords(arg, c) < 0.0) coords.col(c) *= -1.0;
  }
  return coords;
}

void write_embeddings_csv(const LabeledEmbeddings& e, const std::filesystem::path& path) {
  e.validate();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "id,label,split";
  for (Eigen::Index j = 0; j < e.vectors.cols(); ++j) f << ",v" << j;
  f << '\n';
  char buf[40];
  for (std::size_t i = 0; i < e.size(); ++i) {
    f << (e.ids.empty() ? std::to_string(i) : e.ids[i]) << ',' << e.labels[i] << ','
      << (e.split.empty() ? "" : e.split[i]);
    for (Eigen::Index j = 0; j < e.vectors.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.vectors(static_cast<Eigen::Index>(i), j));
      f << ',' << buf;
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

LabeledEmbeddings read_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 3 || line.rfind("id,label,split", 0) != 0) {
    throw std::runtime_error(path.string() + ":1: expected header id,label,split,v0,...");
  }
  const std::size_t dim = columns - 3;
  std::vector<std::vector<double>> rows;
  LabeledEmbeddings e;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != columns) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    try {
      e.ids.push_back(cells[0]);
      e.labels.push_back(std::stoi(cells[1]));
      e.split.push_back(cells[2]);
      std::vector<double> v(dim);
      for (std::size_t j = 0; j < dim; ++j) v[j] = std::stod(cells[3 + j]);
      rows.push_back(std::move(v));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  e.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return e;
}

void write_scatter_svg(const Eigen::MatrixXd& coords, const std::vector<int>& labels,
                       const std::filesystem::path& path) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double kSize = 400.0;
  constexpr double kPad = 20.0;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
  if (coords.rows() > 0) {
    lo_x = coords.col(0).minCoeff();
    hi_x = coords.col(0).maxCoeff();
    lo_y = coords.col(1).minCoeff();
    hi_y = coords.col(1).maxCoeff();
  }
  const double sx = hi_x > lo_x ? (kSize - 2 * kPad) / (hi_x - lo_x) : 1.0;
  const double sy = hi_y > lo_y ? (kSize - 2 * kPad) / (hi_y - lo_y) : 1.0;
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[160];
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double cx = kPad + (coords(i, 0) - lo_x) * sx;
    const double cy = kSize - kPad - (coords(i, 1) - lo_y) * sy;
    const int l = labels.empty() ? 0 : labels[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", cx,
                  cy, kPalette[static_cast<std::size_t>(l) % 10]);
    f << buf;
  }
  f << "</svg>\n";
}

}  // namespace vididi
