#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vididi/augment.hpp"
#include "vididi/network.hpp"
#include "vididi/params.hpp"
#include "vididi/video_tensor.hpp"

namespace vididi {

struct LabeledEmbeddings {
  Eigen::MatrixXd vectors;  // N×D
  std::vector<int> labels;
  std::vector<std::string> split;
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
  /// Rows whose split tag equals `tag`.
  LabeledEmbeddings subset(const std::string& tag) const;
  void validate() const;
};

enum class Distance { Cosine, Euclidean };

struct EmbedOptions {
  std::size_t clip_frames = 8;
  std::size_t stride = 3;
  std::size_t clips = 10;
  std::size_t out_height = 16;
  std::size_t out_width = 16;
  std::vector<double> norm_mean{0.485, 0.456, 0.406};
  std::vector<double> norm_std{0.229, 0.224, 0.225};
  /// Random-resized crop per clip instead of the center crop.
  bool random_crop = false;
  std::uint64_t seed = 0;
};

/// Start frames of `clips` uniformly spaced windows.
std::vector<std::size_t> clip_starts(std::size_t video_frames, std::size_t clip_frames,
                                     std::size_t stride, std::size_t clips);

/// Mean encoder feature (projection discarded) over uniformly spaced clips.
Eigen::VectorXd embed_video(const VideoTensor& video, const ParamSet& params,
                            const NetSpec& spec, const EmbedOptions& opts);

/// recall@k for every k: fraction of queries whose k nearest database rows
/// contain a row of the query's label. Ties go to the lower database index.
std::map<std::size_t, double> knn_recall(const LabeledEmbeddings& db,
                                         const LabeledEmbeddings& queries,
                                         const std::vector<std::size_t>& ks,
                                         Distance distance = Distance::Cosine);

/// Mean silhouette coefficient with Euclidean distance; points in singleton
/// classes score 0, as do points where a = b = 0.
double silhouette(const LabeledEmbeddings& embeddings);

struct ProbeOptions {
  std::size_t epochs = 300;
  double lr = 0.5;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression on standardized frozen features,
/// full-batch gradient descent. Returns top-1 accuracy on `test`.
double linear_probe(const LabeledEmbeddings& train, const LabeledEmbeddings& test,
                    const ProbeOptions& opts = {});

/// Projection on the top two principal components. Each output column is
/// flipped so its largest-magnitude entry is positive.
Eigen::MatrixXd pca2d(const LabeledEmbeddings& embeddings);

/// CSV with header id,label,split,v0..v{D-1}.
void write_embeddings_csv(const LabeledEmbeddings& e, const std::filesystem::path& path);
LabeledEmbeddings read_embeddings_csv(const std::filesystem::path& path);

void write_scatter_svg(const Eigen::MatrixXd& coords, const std::vector<int>& labels,
                       const std::filesystem::path& path);

}  // namespace vididi
