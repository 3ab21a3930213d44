#include "vididi/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vididi {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  v = maxc;
  const double delta = maxc - minc;
  s = maxc > 0.0 ? delta / maxc : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  if (maxc == r) {
    h = (g - b) / delta;
  } else if (maxc == g) {
    h = 2.0 + (b - r) / delta;
  } else {
    h = 4.0 + (r - g) / delta;
  }
  h /= 6.0;
  h -= std::floor(h);
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double h6 = (h - std::floor(h)) * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

double luma(const VideoTensor& clip, std::size_t t, std::size_t i) {
  if (clip.channels() != 3) {
    double s = 0.0;
    for (std::size_t c = 0; c < clip.channels(); ++c) s += clip.plane(c, t)[i];
    return s / static_cast<double>(clip.channels());
  }
  return kLumaR * clip.plane(0, t)[i] + kLumaG * clip.plane(1, t)[i] +
         kLumaB * clip.plane(2, t)[i];
}

void adjust_brightness(VideoTensor& clip, double factor) {
  for (double& v : clip.data()) v = clamp01(v * factor);
}

// Blends toward the mean luma of the whole clip so every frame receives the
// same affine map.
void adjust_contrast(VideoTensor& clip, double factor) {
  double mean = 0.0;
  const std::size_t n = clip.frame_size();
  for (std::size_t t = 0; t < clip.frames(); ++t) {
    for (std::size_t i = 0; i < n; ++i) mean += luma(clip, t, i);
  }
  mean /= static_cast<double>(n * clip.frames());
  for (double& v : clip.data()) v = clamp01(factor * v + (1.0 - factor) * mean);
}

void adjust_saturation(VideoTensor& clip, double factor) {
  if (clip.channels() != 3) return;
  for (std::size_t t = 0; t < clip.frames(); ++t) {
    for (std::size_t i = 0; i < clip.frame_size(); ++i) {
      const double gray = luma(clip, t, i);
      for (std::size_t c = 0; c < 3; ++c) {
        double& v = clip.plane(c, t)[i];
        v = clamp01(factor * v + (1.0 - factor) * gray);
      }
    }
  }
}

void adjust_hue(VideoTensor& clip, double shift) {
  if (clip.channels() != 3 || shift == 0.0) return;
  for (std::size_t t = 0; t < clip.frames(); ++t) {
    auto r = clip.plane(0, t);
    auto g = clip.plane(1, t);
    auto b = clip.plane(2, t);
    for (std::size_t i = 0; i < clip.frame_size(); ++i) {
      double h, s, v;
      rgb_to_hsv(r[i], g[i], b[i], h, s, v);
      hsv_to_rgb(h + shift, s, v, r[i], g[i], b[i]);
    }
  }
}

}  // namespace

void AugmentConfig::validate() const {
  require(is_prob(flip_prob), "augment.flip_prob must be in [0,1]");
  require(is_prob(blur_prob), "augment.blur_prob must be in [0,1]");
  require(is_prob(jitter_prob), "augment.jitter_prob must be in [0,1]");
  require(is_prob(gray_prob), "augment.gray_prob must be in [0,1]");
  require(crop_scale.first > 0.0 && crop_scale.first <= crop_scale.second &&
              crop_scale.second <= 1.0,
          "augment.crop_scale must satisfy 0 < min <= max <= 1");
  require(crop_aspect.first > 0.0 && crop_aspect.first <= crop_aspect.second,
          "augment.crop_aspect must satisfy 0 < min <= max");
  require(out_height > 0 && out_width > 0, "augment.out_height/out_width must be positive");
  require(blur_sigma.first > 0.0 && blur_sigma.first <= blur_sigma.second,
          "augment.blur_sigma must satisfy 0 < min <= max");
  require(jitter_brightness >= 0.0 && jitter_brightness <= 1.0,
          "augment.jitter_brightness must be in [0,1]");
  require(jitter_contrast >= 0.0 && jitter_contrast <= 1.0,
          "augment.jitter_contrast must be in [0,1]");
  require(jitter_saturation >= 0.0 && jitter_saturation <= 1.0,
          "augment.jitter_saturation must be in [0,1]");
  require(jitter_hue >= 0.0 && jitter_hue <= 0.5, "augment.jitter_hue must be in [0,0.5]");
  require(norm_mean.size() == norm_std.size(),
          "augment.norm_mean and augment.norm_std must have equal length");
  for (double s : norm_std) require(s > 0.0, "augment.norm_std entries must be > 0");
}

std::size_t window_span(std::size_t count, std::size_t stride) {
  return (count - 1) * stride + 1;
}

VideoTensor take_window(const VideoTensor& video, std::size_t start, std::size_t count,
                        std::size_t stride) {
  if (count == 0 || stride == 0) throw std::invalid_argument("take_window: count and stride must be >= 1");
  if (start + window_span(count, stride) > video.frames()) {
    throw std::out_of_range("take_window: window exceeds video length");
  }
  VideoTensor out(video.channels(), count, video.height(), video.width());
  for (std::size_t c = 0; c < video.channels(); ++c) {
    for (std::size_t k = 0; k < count; ++k) {
      auto src = video.plane(c, start + k * stride);
      std::copy(src.begin(), src.end(), out.plane(c, k).begin());
    }
  }
  return out;
}

std::pair<VideoTensor, VideoTensor> sample_clip_pair(const VideoTensor& video,
                                                     std::size_t t_plus,
                                                     std::size_t stride, Rng& rng) {
  if (t_plus == 0 || stride == 0) {
    throw std::invalid_argument("sample_clip_pair: t_plus and stride must be >= 1");
  }
  const std::size_t span = window_span(t_plus, stride);
  if (video.frames() < span) {
    throw std::invalid_argument("sample_clip_pair: video has " +
                                std::to_string(video.frames()) + " frames, need " +
                                std::to_string(span));
  }
  const auto last = static_cast<std::int64_t>(video.frames() - span);
  const auto s1 = static_cast<std::size_t>(rng.uniform_int(0, last));
  const auto s2 = static_cast<std::size_t>(rng.uniform_int(0, last));
  return {take_window(video, s1, t_plus, stride), take_window(video, s2, t_plus, stride)};
}

CropRect center_crop(std::size_t height, std::size_t width, std::size_t out_height,
                     std::size_t out_width) {
  const double target = static_cast<double>(out_width) / static_cast<double>(out_height);
  const double source = static_cast<double>(width) / static_cast<double>(height);
  std::size_t w = width;
  std::size_t h = height;
  if (source > target) {
    w = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(static_cast<double>(height) * target)), 1, width);
  } else if (source < target) {
    h = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(static_cast<double>(width) / target)), 1, height);
  }
  return {(width - w) / 2, (height - h) / 2, w, h};
}

CropRect sample_crop(std::size_t height, std::size_t width, const AugmentConfig& cfg,
                     Rng& rng) {
  const double area = static_cast<double>(height * width);
  const double log_lo = std::log(cfg.crop_aspect.first);
  const double log_hi = std::log(cfg.crop_aspect.second);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target_area = area * rng.uniform(cfg.crop_scale.first, cfg.crop_scale.second);
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const auto w = std::lround(std::sqrt(target_area * aspect));
    const auto h = std::lround(std::sqrt(target_area / aspect));
    if (w > 0 && h > 0 && static_cast<std::size_t>(w) <= width &&
        static_cast<std::size_t>(h) <= height) {
      const auto x = rng.uniform_int(0, static_cast<std::int64_t>(width) - w);
      const auto y = rng.uniform_int(0, static_cast<std::int64_t>(height) - h);
      return {static_cast<std::size_t>(x), static_cast<std::size_t>(y),
              static_cast<std::size_t>(w), static_cast<std::size_t>(h)};
    }
  }
  // Fallback: largest centered rectangle whose aspect lies in range.
  const double ratio = static_cast<double>(width) / static_cast<double>(height);
  std::size_t w = width;
  std::size_t h = height;
  if (ratio < cfg.crop_aspect.first) {
    h = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(static_cast<double>(w) / cfg.crop_aspect.first)), 1,
        height);
  } else if (ratio > cfg.crop_aspect.second) {
    w = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(static_cast<double>(h) * cfg.crop_aspect.second)), 1,
        width);
  }
  return {(width - w) / 2, (height - h) / 2, w, h};
}

VideoTensor crop_resize(const VideoTensor& clip, const CropRect& rect, std::size_t out_h,
                        std::size_t out_w) {
  if (rect.w == 0 || rect.h == 0 || rect.x + rect.w > clip.width() ||
      rect.y + rect.h > clip.height()) {
    throw std::out_of_range("crop_resize: rectangle outside frame");
  }
  VideoTensor out(clip.channels(), clip.frames(), out_h, out_w);
  const double sy = static_cast<double>(rect.h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(rect.w) / static_cast<double>(out_w);

  struct Tap {
    std::size_t i0, i1;
    double frac;
  };
  auto taps = [](std::size_t n_out, double scale, std::size_t offset, std::size_t n_src) {
    std::vector<Tap> result(n_out);
    for (std::size_t d = 0; d < n_out; ++d) {
      double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(n_src - 1));
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, n_src - 1);
      result[d] = {offset + i0, offset + i1, src - static_cast<double>(i0)};
    }
    return result;
  };
  const auto ty = taps(out_h, sy, rect.y, rect.h);
  const auto tx = taps(out_w, sx, rect.x, rect.w);

  for (std::size_t c = 0; c < clip.channels(); ++c) {
    for (std::size_t t = 0; t < clip.frames(); ++t) {
      auto src = clip.plane(c, t);
      auto dst = out.plane(c, t);
      for (std::size_t y = 0; y < out_h; ++y) {
        const Tap& a = ty[y];
        for (std::size_t x = 0; x < out_w; ++x) {
          const Tap& b = tx[x];
          const double top = src[a.i0 * clip.width() + b.i0];
          const double top_r = src[a.i0 * clip.width() + b.i1];
          const double bot = src[a.i1 * clip.width() + b.i0];
          const double bot_r = src[a.i1 * clip.width() + b.i1];
          double v_top = top;
          double v_bot = bot;
          if (b.frac != 0.0) {
            v_top = top + b.frac * (top_r - top);
            v_bot = bot + b.frac * (bot_r - bot);
          }
          dst[y * out_w + x] = a.frac != 0.0 ? v_top + a.frac * (v_bot - v_top) : v_top;
        }
      }
    }
  }
  return out;
}

VideoTensor hflip(const VideoTensor& clip) {
  VideoTensor out = clip;
  const std::size_t w = clip.width();
  for (std::size_t c = 0; c < clip.channels(); ++c) {
    for (std::size_t t = 0; t < clip.frames(); ++t) {
      auto src = clip.plane(c, t);
      auto dst = out.plane(c, t);
      for (std::size_t y = 0; y < clip.height(); ++y) {
        for (std::size_t x = 0; x < w; ++x) dst[y * w + x] = src[y * w + (w - 1 - x)];
      }
    }
  }
  return out;
}

VideoTensor gaussian_blur3(const VideoTensor& clip, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur3: sigma must be > 0");
  const double side = std::exp(-1.0 / (2.0 * sigma * sigma));
  const double norm = 1.0 + 2.0 * side;
  const double k[3] = {side / norm, 1.0 / norm, side / norm};

  const std::size_t h = clip.height();
  const std::size_t w = clip.width();
  VideoTensor out(clip.channels(), clip.frames(), h, w);
  std::vector<double> tmp(h * w);
  auto clampi = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t c = 0; c < clip.channels(); ++c) {
    for (std::size_t t = 0; t < clip.frames(); ++t) {
      auto src = clip.plane(c, t);
      auto dst = out.plane(c, t);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int d = -1; d <= 1; ++d) {
            acc += k[d + 1] * src[y * w + clampi(static_cast<std::ptrdiff_t>(x) + d, w)];
          }
          tmp[y * w + x] = acc;
        }
      }
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int d = -1; d <= 1; ++d) {
            acc += k[d + 1] * tmp[clampi(static_cast<std::ptrdiff_t>(y) + d, h) * w + x];
          }
          dst[y * w + x] = acc;
        }
      }
    }
  }
  return out;
}

VideoTensor color_jitter(const VideoTensor& clip, const JitterFactors& jitter) {
  VideoTensor out = clip;
  for (JitterOp op : jitter.order) {
    switch (op) {
      case JitterOp::Brightness: adjust_brightness(out, jitter.brightness); break;
      case JitterOp::Contrast: adjust_contrast(out, jitter.contrast); break;
      case JitterOp::Saturation: adjust_saturation(out, jitter.saturation); break;
      case JitterOp::Hue: adjust_hue(out, jitter.hue); break;
    }
  }
  return out;
}

VideoTensor to_gray(const VideoTensor& clip) {
  if (clip.channels() != 3) return clip;
  VideoTensor out = clip;
  for (std::size_t t = 0; t < clip.frames(); ++t) {
    for (std::size_t i = 0; i < clip.frame_size(); ++i) {
      const double g = luma(clip, t, i);
      for (std::size_t c = 0; c < 3; ++c) out.plane(c, t)[i] = g;
    }
  }
  return out;
}

VideoTensor normalize(const VideoTensor& clip, const std::vector<double>& mean,
                      const std::vector<double>& std) {
  if (mean.size() != clip.channels() || std.size() != clip.channels()) {
    throw std::invalid_argument("normalize: expected " + std::to_string(clip.channels()) +
                                " mean/std entries");
  }
  for (double s : std) {
    if (!(s > 0.0)) throw std::invalid_argument("normalize: std must be > 0");
  }
  VideoTensor out = clip;
  for (std::size_t c = 0; c < clip.channels(); ++c) {
    for (std::size_t t = 0; t < clip.frames(); ++t) {
      for (double& v : out.plane(c, t)) v = (v - mean[c]) / std[c];
    }
  }
  return out;
}

VideoTensor apply_augment(const VideoTensor& clip, const AugmentRecord& rec,
                          const AugmentConfig& cfg) {
  VideoTensor out = crop_resize(clip, rec.crop_rect, cfg.out_height, cfg.out_width);
  if (rec.flipped) out = hflip(out);
  if (rec.blur_sigma) out = gaussian_blur3(out, *rec.blur_sigma);
  if (rec.jitter) out = color_jitter(out, *rec.jitter);
  if (rec.grayed) out = to_gray(out);
  return normalize(out, cfg.norm_mean, cfg.norm_std);
}

std::pair<VideoTensor, AugmentRecord> spatial_augment(const VideoTensor& clip,
                                                      const AugmentConfig& cfg, Rng& rng) {
  if (clip.size() == 0) throw std::invalid_argument("spatial_augment: empty clip");
  AugmentRecord rec;
  rec.flipped = rng.bernoulli(cfg.flip_prob);
  rec.crop_rect = sample_crop(clip.height(), clip.width(), cfg, rng);
  if (rng.bernoulli(cfg.blur_prob)) {
    rec.blur_sigma = rng.uniform(cfg.blur_sigma.first, cfg.blur_sigma.second);
  }
  if (rng.bernoulli(cfg.jitter_prob)) {
    JitterFactors j;
    j.brightness = rng.uniform(1.0 - cfg.jitter_brightness, 1.0 + cfg.jitter_brightness);
    j.contrast = rng.uniform(1.0 - cfg.jitter_contrast, 1.0 + cfg.jitter_contrast);
    j.saturation = rng.uniform(1.0 - cfg.jitter_saturation, 1.0 + cfg.jitter_saturation);
    j.hue = rng.uniform(-cfg.jitter_hue, cfg.jitter_hue);
    // Fisher-Yates with our own draws keeps the order reproducible.
    for (std::size_t i = j.order.size() - 1; i > 0; --i) {
      const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(j.order[i], j.order[k]);
    }
    rec.jitter = j;
  }
  rec.grayed = rng.bernoulli(cfg.gray_prob);
  return {apply_augment(clip, rec, cfg), rec};
}

}  // namespace vididi
