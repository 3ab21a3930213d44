#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vididi {

/// Dense clip stored as (channel, frame, row, col), row-major.
class VideoTensor {
 public:
  VideoTensor() = default;
  VideoTensor(std::size_t channels, std::size_t frames, std::size_t height,
              std::size_t width, double fill = 0.0);
  VideoTensor(std::size_t channels, std::size_t frames, std::size_t height,
              std::size_t width, std::vector<double> data);

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t frame_size() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(std::size_t c, std::size_t t, std::size_t y,
                    std::size_t x) const {
    return ((c * frames_ + t) * height_ + y) * width_ + x;
  }
  double& at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) {
    return data_[index(c, t, y, x)];
  }
  double at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) const {
    return data_[index(c, t, y, x)];
  }

  /// One channel plane of one frame.
  std::span<double> plane(std::size_t c, std::size_t t) {
    return {data_.data() + index(c, t, 0, 0), frame_size()};
  }
  std::span<const double> plane(std::size_t c, std::size_t t) const {
    return {data_.data() + index(c, t, 0, 0), frame_size()};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const VideoTensor& other) const;

  /// Extracts frame `t` as a C×H×W clip with a single frame.
  VideoTensor frame(std::size_t t) const;

  friend bool operator==(const VideoTensor&, const VideoTensor&) = default;

  VideoTensor& operator+=(const VideoTensor& rhs);
  VideoTensor& operator-=(const VideoTensor& rhs);
  VideoTensor& operator*=(double s);

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

VideoTensor operator+(VideoTensor lhs, const VideoTensor& rhs);
VideoTensor operator-(VideoTensor lhs, const VideoTensor& rhs);
VideoTensor operator*(double s, VideoTensor x);

/// Batch of clips sharing one shape.
class ClipBatch {
 public:
  ClipBatch() = default;
  explicit ClipBatch(std::vector<VideoTensor> items);

  std::size_t size() const { return items_.size(); }
  const VideoTensor& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<VideoTensor>& items() const { return items_; }
  std::size_t channels() const { return items_.front().channels(); }
  std::size_t frames() const { return items_.front().frames(); }
  std::size_t height() const { return items_.front().height(); }
  std::size_t width() const { return items_.front().width(); }

 private:
  std::vector<VideoTensor> items_;
};

/// First forward difference along time: out(n) = x(n+1) - x(n).
VideoTensor diff1(const VideoTensor& x);

/// Second forward difference: out(n) = x(n+2) - 2 x(n+1) + x(n).
VideoTensor diff2(const VideoTensor& x);

/// Applies diff1 `order` times (order in {0,1,2}).
VideoTensor differentiate(const VideoTensor& x, int order);

/// Newton forward-difference reconstruction of frame t from the three
/// frames starting at n. Exact for t in {n, n+1, n+2}.
VideoTensor taylor_reconstruct(const VideoTensor& x, std::size_t n,
                               std::size_t t);

/// Keeps the first `t` frames.
VideoTensor truncate_frames(const VideoTensor& x, std::size_t t);

/// Repeats a single-frame clip along time.
VideoTensor broadcast_frames(const VideoTensor& frame, std::size_t frames);

}  // namespace vididi
