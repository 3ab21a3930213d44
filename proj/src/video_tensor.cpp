#include "vididi/video_tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vididi {

VideoTensor::VideoTensor(std::size_t channels, std::size_t frames,
                         std::size_t height, std::size_t width, double fill)
    : channels_(channels),
      frames_(frames),
      height_(height),
      width_(width),
      data_(channels * frames * height * width, fill) {
  if (frames == 0) throw std::invalid_argument("VideoTensor: frames must be >= 1");
}

VideoTensor::VideoTensor(std::size_t channels, std::size_t frames,
                         std::size_t height, std::size_t width,
                         std::vector<double> data)
    : channels_(channels),
      frames_(frames),
      height_(height),
      width_(width),
      data_(std::move(data)) {
  if (frames == 0) throw std::invalid_argument("VideoTensor: frames must be >= 1");
  if (data_.size() != channels * frames * height * width) {
    throw std::invalid_argument("VideoTensor: data length " +
                                std::to_string(data_.size()) +
                                " does not match shape");
  }
}

bool VideoTensor::same_shape(const VideoTensor& other) const {
  return channels_ == other.channels_ && frames_ == other.frames_ &&
         height_ == other.height_ && width_ == other.width_;
}

VideoTensor VideoTensor::frame(std::size_t t) const {
  if (t >= frames_) throw std::out_of_range("VideoTensor::frame: index out of range");
  VideoTensor out(channels_, 1, height_, width_);
  for (std::size_t c = 0; c < channels_; ++c) {
    auto src = plane(c, t);
    std::copy(src.begin(), src.end(), out.plane(c, 0).begin());
  }
  return out;
}

VideoTensor& VideoTensor::operator+=(const VideoTensor& rhs) {
  if (!same_shape(rhs)) throw std::invalid_argument("VideoTensor +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

VideoTensor& VideoTensor::operator-=(const VideoTensor& rhs) {
  if (!same_shape(rhs)) throw std::invalid_argument("VideoTensor -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

VideoTensor& VideoTensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

VideoTensor operator+(VideoTensor lhs, const VideoTensor& rhs) { return lhs += rhs; }
VideoTensor operator-(VideoTensor lhs, const VideoTensor& rhs) { return lhs -= rhs; }
VideoTensor operator*(double s, VideoTensor x) { return x *= s; }

ClipBatch::ClipBatch(std::vector<VideoTensor> items) : items_(std::move(items)) {
  if (items_.empty()) throw std::invalid_argument("ClipBatch: batch must be non-empty");
  for (const auto& item : items_) {
    if (!item.same_shape(items_.front())) {
      throw std::invalid_argument("ClipBatch: items differ in shape");
    }
  }
}

VideoTensor diff1(const VideoTensor& x) {
  if (x.frames() < 2) {
    throw std::invalid_argument("diff1: clip needs at least 2 frames, got " +
                                std::to_string(x.frames()));
  }
  VideoTensor out(x.channels(), x.frames() - 1, x.height(), x.width());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t t = 0; t + 1 < x.frames(); ++t) {
      auto a = x.plane(c, t);
      auto b = x.plane(c, t + 1);
      auto dst = out.plane(c, t);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = b[i] - a[i];
    }
  }
  return out;
}

VideoTensor diff2(const VideoTensor& x) {
  if (x.frames() < 3) {
    throw std::invalid_argument("diff2: clip needs at least 3 frames, got " +
                                std::to_string(x.frames()));
  }
  VideoTensor out(x.channels(), x.frames() - 2, x.height(), x.width());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t t = 0; t + 2 < x.frames(); ++t) {
      auto a = x.plane(c, t);
      auto b = x.plane(c, t + 1);
      auto d = x.plane(c, t + 2);
      auto dst = out.plane(c, t);
      // Grouped as (d - b) - (b - a) so the result is bit-identical to
      // diff1 applied twice.
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (d[i] - b[i]) - (b[i] - a[i]);
    }
  }
  return out;
}

VideoTensor differentiate(const VideoTensor& x, int order) {
  switch (order) {
    case 0: return x;
    case 1: return diff1(x);
    case 2: return diff2(x);
    default:
      throw std::invalid_argument("differentiate: order must be 0, 1 or 2");
  }
}

VideoTensor taylor_reconstruct(const VideoTensor& x, std::size_t n, std::size_t t) {
  if (n + 2 >= x.frames()) {
    throw std::out_of_range("taylor_reconstruct: n + 2 must be < frames");
  }
  if (t < n || t > n + 2) {
    throw std::out_of_range("taylor_reconstruct: t must lie in [n, n+2]");
  }
  const double k = static_cast<double>(t - n);
  const double c1 = k;
  const double c2 = k * (k - 1.0) / 2.0;
  VideoTensor out(x.channels(), 1, x.height(), x.width());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto v0 = x.plane(c, n);
    auto v1 = x.plane(c, n + 1);
    auto v2 = x.plane(c, n + 2);
    auto dst = out.plane(c, 0);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double d1 = v1[i] - v0[i];
      const double d2 = (v2[i] - v1[i]) - d1;
      double value = v0[i];
      if (c1 != 0.0) value += c1 * d1;
      if (c2 != 0.0) value += c2 * d2;
      dst[i] = value;
    }
  }
  return out;
}

VideoTensor truncate_frames(const VideoTensor& x, std::size_t t) {
  if (t > x.frames()) {
    throw std::out_of_range("truncate_frames: requested " + std::to_string(t) +
                            " frames from a clip of " + std::to_string(x.frames()));
  }
  if (t == x.frames()) return x;
  VideoTensor out(x.channels(), t, x.height(), x.width());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t f = 0; f < t; ++f) {
      auto src = x.plane(c, f);
      std::copy(src.begin(), src.end(), out.plane(c, f).begin());
    }
  }
  return out;
}

VideoTensor broadcast_frames(const VideoTensor& frame, std::size_t frames) {
  if (frame.frames() != 1) throw std::invalid_argument("broadcast_frames: expected a single frame");
  VideoTensor out(frame.channels(), frames, frame.height(), frame.width());
  for (std::size_t c = 0; c < frame.channels(); ++c) {
    auto src = frame.plane(c, 0);
    for (std::size_t t = 0; t < frames; ++t) {
      std::copy(src.begin(), src.end(), out.plane(c, t).begin());
    }
  }
  return out;
}

}  // namespace vididi
