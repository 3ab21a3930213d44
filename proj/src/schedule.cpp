#include "vididi/schedule.hpp"

#include <cstdlib>
#include <stdexcept>

namespace vididi {

namespace {

constexpr std::array<ViewPairSpec, 7> kLegal{{
    {0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2},
}};

// Deterministic part of the balanced alternating schedule.
ViewPairSpec alternating_step(std::uint64_t epoch) {
  switch (epoch % 4) {
    case 0: return {1, 1};
    case 1: return {1, 0};
    case 2: return {0, 1};
    default: return {0, 0};
  }
}

ViewPairSpec random_increment(ViewPairSpec p, double u) {
  if (u < 0.5) {
    ++p.order_a;
    ++p.order_b;
  }
  return p;
}

}  // namespace

bool is_legal(const ViewPairSpec& pair) {
  return pair.order_a >= 0 && pair.order_a <= 2 && pair.order_b >= 0 &&
         pair.order_b <= 2 && std::abs(pair.order_a - pair.order_b) <= 1;
}

const std::array<ViewPairSpec, 7>& legal_pairs() { return kLegal; }

const std::array<SchedulePolicy, 9>& all_policies() {
  static constexpr std::array<SchedulePolicy, 9> kAll{
      SchedulePolicy::Base,    SchedulePolicy::Random1,   SchedulePolicy::Random12,
      SchedulePolicy::Reverse, SchedulePolicy::Sched1,    SchedulePolicy::Sched1Mix,
      SchedulePolicy::Sched12, SchedulePolicy::Sched12Mix, SchedulePolicy::ViDiDi};
  return kAll;
}

std::string_view policy_name(SchedulePolicy policy) {
  switch (policy) {
    case SchedulePolicy::Base: return "base";
    case SchedulePolicy::Random1: return "random-1";
    case SchedulePolicy::Random12: return "random-12";
    case SchedulePolicy::Reverse: return "reverse";
    case SchedulePolicy::Sched1: return "sched-1";
    case SchedulePolicy::Sched1Mix: return "sched-1-mix";
    case SchedulePolicy::Sched12: return "sched-12";
    case SchedulePolicy::Sched12Mix: return "sched-12-mix";
    case SchedulePolicy::ViDiDi: return "vididi";
  }
  return "?";
}

std::optional<SchedulePolicy> parse_policy(std::string_view name) {
  for (SchedulePolicy p : all_policies()) {
    if (policy_name(p) == name) return p;
  }
  return std::nullopt;
}

ViewPairSpec select_pair(SchedulePolicy policy, std::uint64_t epoch, double u) {
  switch (policy) {
    case SchedulePolicy::Base:
      return {0, 0};
    case SchedulePolicy::Random1:
      return u < 0.5 ? ViewPairSpec{1, 1} : ViewPairSpec{0, 0};
    case SchedulePolicy::Random12: {
      const int k = u < 1.0 / 3.0 ? 0 : (u < 2.0 / 3.0 ? 1 : 2);
      return {k, k};
    }
    case SchedulePolicy::Sched1:
      return epoch % 2 == 0 ? ViewPairSpec{1, 1} : ViewPairSpec{0, 0};
    case SchedulePolicy::Sched1Mix:
      switch (epoch % 3) {
        case 0: return {1, 1};
        case 1: return {1, 0};
        default: return {0, 0};
      }
    case SchedulePolicy::Sched12:
      return random_increment(select_pair(SchedulePolicy::Sched1, epoch, u), u);
    case SchedulePolicy::Sched12Mix:
      return random_increment(select_pair(SchedulePolicy::Sched1Mix, epoch, u), u);
    case SchedulePolicy::Reverse:
      return random_increment(alternating_step(3 - epoch % 4), u);
    case SchedulePolicy::ViDiDi:
      return random_increment(alternating_step(epoch), u);
  }
  throw std::logic_error("select_pair: unknown policy");
}

Rng schedule_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t batch) {
  return Rng(seed, {key_of("schedule"), epoch, batch});
}

ViewPairSpec select_pair(SchedulePolicy policy, std::uint64_t epoch, Rng& rng) {
  return select_pair(policy, epoch, rng.uniform());
}

PairHistogram pair_frequencies(SchedulePolicy policy, std::uint64_t epochs,
                               std::uint64_t batches_per_epoch, std::uint64_t seed,
                               std::optional<double> forced_draw) {
  if (epochs == 0) throw std::invalid_argument("pair_frequencies: epochs must be >= 1");
  PairHistogram hist;
  for (std::uint64_t e = 0; e < epochs; ++e) {
    for (std::uint64_t b = 0; b < batches_per_epoch; ++b) {
      double u;
      if (forced_draw) {
        u = *forced_draw;
      } else {
        Rng rng = schedule_stream(seed, e, b);
        u = rng.uniform();
      }
      ++hist[select_pair(policy, e, u)];
    }
  }
  return hist;
}

}  // namespace vididi
