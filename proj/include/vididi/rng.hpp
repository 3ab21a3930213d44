#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace vididi {

/// Seedable generator addressed by a key path, e.g. (seed, epoch, batch,
/// item, view). Two generators built from the same path produce the same
/// stream regardless of which thread or in which order they are created.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Child stream keyed by this stream's path plus `key`.
  Rng split(std::uint64_t key) const;
  Rng split(std::initializer_list<std::uint64_t> keys) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  const std::vector<std::uint64_t>& path() const { return path_; }

 private:
  explicit Rng(std::vector<std::uint64_t> path);

  std::vector<std::uint64_t> path_;
  std::mt19937_64 engine_;
};

/// Stable 64-bit tag for string keys (FNV-1a).
constexpr std::uint64_t key_of(const char* s) {
  std::uint64_t h = 1469598103934665603ull;
  while (*s) {
    h ^= static_cast<unsigned char>(*s++);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vididi
