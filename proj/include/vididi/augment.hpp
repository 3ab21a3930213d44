#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "vididi/rng.hpp"
#include "vididi/video_tensor.hpp"

namespace vididi {

struct AugmentConfig {
  double flip_prob = 0.5;
  std::pair<double, double> crop_scale{0.08, 1.0};
  std::pair<double, double> crop_aspect{3.0 / 4.0, 4.0 / 3.0};
  std::size_t out_height = 112;
  std::size_t out_width = 112;
  double blur_prob = 0.5;
  std::pair<double, double> blur_sigma{0.1, 2.0};
  double jitter_prob = 0.8;
  double jitter_brightness = 0.2;
  double jitter_contrast = 0.2;
  double jitter_saturation = 0.2;
  double jitter_hue = 0.05;
  double gray_prob = 0.5;
  std::vector<double> norm_mean{0.485, 0.456, 0.406};
  std::vector<double> norm_std{0.229, 0.224, 0.225};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

struct CropRect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

enum class JitterOp { Brightness, Contrast, Saturation, Hue };

struct JitterFactors {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;
  std::array<JitterOp, 4> order{JitterOp::Brightness, JitterOp::Contrast,
                                JitterOp::Saturation, JitterOp::Hue};
  friend bool operator==(const JitterFactors&, const JitterFactors&) = default;
};

/// Parameters drawn once per clip and applied to every frame.
struct AugmentRecord {
  CropRect crop_rect;
  bool flipped = false;
  std::optional<double> blur_sigma;
  std::optional<JitterFactors> jitter;
  bool grayed = false;
  friend bool operator==(const AugmentRecord&, const AugmentRecord&) = default;
};

/// Two independent temporal windows of `t_plus` frames at `stride`.
std::pair<VideoTensor, VideoTensor> sample_clip_pair(const VideoTensor& video,
                                                     std::size_t t_plus,
                                                     std::size_t stride, Rng& rng);

/// Frames start, start+stride, ... (count frames).
VideoTensor take_window(const VideoTensor& video, std::size_t start,
                        std::size_t count, std::size_t stride);

std::size_t window_span(std::size_t count, std::size_t stride);

/// Random-resized-crop rectangle. Falls back to a center crop after 10
/// rejected attempts.
CropRect sample_crop(std::size_t height, std::size_t width, const AugmentConfig& cfg,
                     Rng& rng);

/// Largest center crop of the frame with the aspect ratio of the output.
CropRect center_crop(std::size_t height, std::size_t width, std::size_t out_height,
                     std::size_t out_width);

/// Bilinear resize of `rect` to (out_h, out_w) with half-pixel centers.
VideoTensor crop_resize(const VideoTensor& clip, const CropRect& rect,
                        std::size_t out_h, std::size_t out_w);

VideoTensor hflip(const VideoTensor& clip);
VideoTensor gaussian_blur3(const VideoTensor& clip, double sigma);
VideoTensor color_jitter(const VideoTensor& clip, const JitterFactors& jitter);
VideoTensor to_gray(const VideoTensor& clip);

VideoTensor normalize(const VideoTensor& clip, const std::vector<double>& mean,
                      const std::vector<double>& std);

/// Applies a previously drawn record; normalization last.
VideoTensor apply_augment(const VideoTensor& clip, const AugmentRecord& rec,
                          const AugmentConfig& cfg);

/// Draws one record per clip and applies it.
std::pair<VideoTensor, AugmentRecord> spatial_augment(const VideoTensor& clip,
                                                      const AugmentConfig& cfg,
                                                      Rng& rng);

}  // namespace vididi
