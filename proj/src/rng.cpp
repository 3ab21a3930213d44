#include "vididi/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vididi {

namespace {

std::mt19937_64 seeded_engine(const std::vector<std::uint64_t>& path) {
  std::vector<std::uint32_t> words;
  words.reserve(path.size() * 2 + 1);
  words.push_back(static_cast<std::uint32_t>(path.size()));
  for (std::uint64_t v : path) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : Rng(std::vector<std::uint64_t>{seed}) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : Rng([&] {
        std::vector<std::uint64_t> p{seed};
        p.insert(p.end(), path.begin(), path.end());
        return p;
      }()) {}

Rng::Rng(std::vector<std::uint64_t> path)
    : path_(std::move(path)), engine_(seeded_engine(path_)) {}

Rng Rng::split(std::uint64_t key) const {
  auto p = path_;
  p.push_back(key);
  return Rng(std::move(p));
}

Rng Rng::split(std::initializer_list<std::uint64_t> keys) const {
  auto p = path_;
  p.insert(p.end(), keys.begin(), keys.end());
  return Rng(std::move(p));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vididi
