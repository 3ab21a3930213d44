#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vididi/video_tensor.hpp"

namespace vididi {

/// Generating factors of one video. The background depends only on the
/// static fields; the sprite height follows y(t) = y0 + v0 t - g t^2 / 2,
/// measured upward from the bottom row.
struct SceneLatents {
  std::uint64_t texture_seed = 0;  // static class texture
  std::uint64_t noise_seed = 0;    // per-video static perturbation
  double base_intensity = 0.3;
  double texture_amplitude = 0.2;
  double noise_amplitude = 0.02;
  double tint_amplitude = 0.1;  // per-channel offset range of the class tint
  double x = 0.0;   // sprite column (pixels)
  double y0 = 0.0;  // pixels
  double v0 = 0.0;  // pixels / frame
  double g = 0.0;   // pixels / frame^2
  double radius = 2.5;
  double sprite_amplitude = 0.4;

  double height_at(double t) const { return y0 + v0 * t - 0.5 * g * t * t; }
  friend bool operator==(const SceneLatents&, const SceneLatents&) = default;
};

/// Static background, C×1×H×W.
VideoTensor render_background(const SceneLatents& latents, std::size_t channels,
                              std::size_t height, std::size_t width);

/// Sprite contribution alone at frame t, C×1×H×W (no background, unclipped).
VideoTensor render_sprite(const SceneLatents& latents, double t, std::size_t channels,
                          std::size_t height, std::size_t width);

/// Background + sprite, clipped to [0,1] and rounded to f32 precision.
VideoTensor render_frame(const SceneLatents& latents, std::size_t t, std::size_t channels,
                         std::size_t height, std::size_t width);

VideoTensor render_video(const SceneLatents& latents, std::size_t frames, std::size_t channels,
                         std::size_t height, std::size_t width);

/// Row coordinate of a height value (rows grow downward).
inline double height_to_row(double y, std::size_t image_height) {
  return static_cast<double>(image_height) - 1.0 - y;
}

/// True when the sprite disk at frame t is entirely inside the frame.
bool sprite_inside(const SceneLatents& latents, double t, std::size_t height, std::size_t width);
/// True when no part of the sprite disk overlaps the frame.
bool sprite_outside(const SceneLatents& latents, double t, std::size_t height, std::size_t width);

/// Intensity-weighted centroid height of (frame - background) on channel 0.
double sprite_height_centroid(const VideoTensor& video, std::size_t t,
                              const VideoTensor& background);

/// Sprite heights for every frame, recovered from pixels.
std::vector<double> track_sprite(const VideoTensor& video, const VideoTensor& background);

struct VideoMeta {
  std::string id;
  int dynamic_label = 0;
  int static_label = 0;
  std::string split = "train";
  SceneLatents latents;
  bool clipped = false;       // sprite touches the border in some frame
  bool out_of_frame = false;  // sprite fully outside in some frame
};

struct GenerateOptions {
  std::size_t n_videos = 64;
  std::size_t frames = 32;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t channels = 3;
  std::vector<double> g_values;
  std::size_t bg_classes = 4;
  std::uint64_t seed = 0;
  /// Train videos pair background b with gravity class b; test videos pair
  /// background (g+1) mod G with gravity class g.
  bool shortcut = false;
  double radius = 2.5;
  /// Scales how far background classes differ in intensity, tint and texture.
  double background_contrast = 1.0;
  std::size_t workers = 1;
};

struct SynthDataset {
  std::vector<VideoTensor> videos;
  std::vector<VideoMeta> meta;
  std::vector<double> g_values;
  std::size_t bg_classes = 0;
  bool shortcut = false;
  std::uint64_t seed = 0;

  std::vector<std::size_t> indices_of_split(const std::string& split) const;
};

/// Evenly spaced gravities whose parabolas fit a `height`-pixel frame over
/// `frames` frames with the generator's apex range.
std::vector<double> default_g_values(std::size_t classes, std::size_t frames, std::size_t height,
                                     double radius = 2.5);

SynthDataset generate(const GenerateOptions& opts);

/// Background of a dataset video (regenerated from its latents).
VideoTensor background_of(const SynthDataset& ds, std::size_t index);

void save_dataset(const SynthDataset& ds, const std::filesystem::path& dir);
SynthDataset load_dataset(const std::filesystem::path& dir, std::size_t workers = 1);

}  // namespace vididi
