#include <doctest.h>

#include <cmath>

#include "vididi/schedule.hpp"

using namespace vididi;

namespace {

constexpr ViewPairSpec P(int a, int b) { return {a, b}; }

}  // namespace

TEST_CASE("exactly seven legal pairs") {
  int count = 0;
  for (int a = 0; a <= 3; ++a) {
    for (int b = 0; b <= 3; ++b) count += is_legal({a, b}) ? 1 : 0;
  }
  CHECK(count == 7);
  CHECK_FALSE(is_legal(P(0, 2)));
  CHECK_FALSE(is_legal(P(2, 0)));
  CHECK_FALSE(is_legal(P(-1, 0)));
  for (const auto& p : legal_pairs()) CHECK(is_legal(p));
}

TEST_CASE("policy names round trip") {
  for (SchedulePolicy p : all_policies()) CHECK(parse_policy(policy_name(p)) == p);
  CHECK(policy_name(SchedulePolicy::Sched12Mix) == "sched-12-mix");
  CHECK(policy_name(SchedulePolicy::Random1) == "random-1");
  CHECK_FALSE(parse_policy("ViDiDi").has_value());
}

TEST_CASE("alternating branches with the increment disabled") {
  CHECK(select_pair(SchedulePolicy::ViDiDi, 4, kForcedHighDraw) == P(1, 1));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 5, kForcedHighDraw) == P(1, 0));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 6, kForcedHighDraw) == P(0, 1));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 7, kForcedHighDraw) == P(0, 0));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 1, kForcedLowDraw) == P(2, 1));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 3, kForcedLowDraw) == P(1, 1));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 0, 0.4999) == P(2, 2));
  CHECK(select_pair(SchedulePolicy::ViDiDi, 0, 0.5) == P(1, 1));
}

TEST_CASE("reverse runs the cycle backwards and keeps the increment") {
  CHECK(select_pair(SchedulePolicy::Reverse, 0, kForcedHighDraw) == P(0, 0));
  CHECK(select_pair(SchedulePolicy::Reverse, 1, kForcedHighDraw) == P(0, 1));
  CHECK(select_pair(SchedulePolicy::Reverse, 2, kForcedHighDraw) == P(1, 0));
  CHECK(select_pair(SchedulePolicy::Reverse, 3, kForcedHighDraw) == P(1, 1));
  CHECK(select_pair(SchedulePolicy::Reverse, 0, kForcedLowDraw) == P(1, 1));
}

TEST_CASE("ablation policies") {
  for (std::uint64_t e = 0; e < 12; ++e) {
    CHECK(select_pair(SchedulePolicy::Base, e, 0.1) == P(0, 0));
    CHECK(select_pair(SchedulePolicy::Sched1, e, kForcedLowDraw) == (e % 2 == 0 ? P(1, 1) : P(0, 0)));
    const ViewPairSpec mix[] = {P(1, 1), P(1, 0), P(0, 0)};
    CHECK(select_pair(SchedulePolicy::Sched1Mix, e, kForcedLowDraw) == mix[e % 3]);
    CHECK(select_pair(SchedulePolicy::Sched12Mix, e, kForcedHighDraw) == mix[e % 3]);
    const ViewPairSpec inc = select_pair(SchedulePolicy::Sched12Mix, e, kForcedLowDraw);
    CHECK(inc == P(mix[e % 3].order_a + 1, mix[e % 3].order_b + 1));
    CHECK(select_pair(SchedulePolicy::Sched12, e, kForcedLowDraw) ==
          (e % 2 == 0 ? P(2, 2) : P(1, 1)));
  }
  CHECK(select_pair(SchedulePolicy::Random1, 0, 0.2) == P(1, 1));
  CHECK(select_pair(SchedulePolicy::Random1, 0, 0.7) == P(0, 0));
  CHECK(select_pair(SchedulePolicy::Random12, 0, 0.1) == P(0, 0));
  CHECK(select_pair(SchedulePolicy::Random12, 0, 0.5) == P(1, 1));
  CHECK(select_pair(SchedulePolicy::Random12, 0, 0.9) == P(2, 2));
}

TEST_CASE("every policy emits legal pairs with orders at most two") {
  for (SchedulePolicy p : all_policies()) {
    for (std::uint64_t e = 0; e < 1000; ++e) {
      for (double u : {kForcedLowDraw, 0.25, 0.5, 0.75, kForcedHighDraw}) {
        const ViewPairSpec pair = select_pair(p, e, u);
        CHECK(is_legal(pair));
        CHECK(pair.order_a <= 2);
        CHECK(pair.order_b <= 2);
      }
    }
  }
}

TEST_CASE("periods of the deterministic steps") {
  for (std::uint64_t e = 0; e < 40; ++e) {
    CHECK(select_pair(SchedulePolicy::ViDiDi, e, kForcedHighDraw) ==
          select_pair(SchedulePolicy::ViDiDi, e + 4, kForcedHighDraw));
    CHECK(select_pair(SchedulePolicy::Sched1, e, kForcedHighDraw) ==
          select_pair(SchedulePolicy::Sched1, e + 2, kForcedHighDraw));
    CHECK(select_pair(SchedulePolicy::Sched1Mix, e, kForcedHighDraw) ==
          select_pair(SchedulePolicy::Sched1Mix, e + 3, kForcedHighDraw));
  }
  CHECK(select_pair(SchedulePolicy::ViDiDi, 0, kForcedHighDraw) !=
        select_pair(SchedulePolicy::ViDiDi, 2, kForcedHighDraw));
}

TEST_CASE("pair frequencies") {
  const PairHistogram forced = pair_frequencies(SchedulePolicy::ViDiDi, 4, 1, 0, kForcedHighDraw);
  CHECK(forced == PairHistogram{{P(0, 0), 1}, {P(0, 1), 1}, {P(1, 0), 1}, {P(1, 1), 1}});
  CHECK(pair_frequencies(SchedulePolicy::Base, 7, 3, 5) == PairHistogram{{P(0, 0), 21}});

  const PairHistogram h = pair_frequencies(SchedulePolicy::ViDiDi, 4000, 1, 42);
  // Each deterministic branch covers 1000 epochs; about half are incremented.
  const double sigma = std::sqrt(1000 * 0.25);
  auto count = [&](ViewPairSpec p) { return h.count(p) ? static_cast<double>(h.at(p)) : 0.0; };
  for (auto [plain, inc] : {std::pair{P(1, 1), P(2, 2)}, {P(1, 0), P(2, 1)}, {P(0, 1), P(1, 2)}}) {
    CHECK(std::abs(count(inc) - 500.0) <= 3 * sigma);
  }
  // (1,1) gets the un-incremented half of epoch%4==0 plus the incremented
  // half of epoch%4==3.
  CHECK(count(P(0, 0)) == doctest::Approx(500).epsilon(3 * sigma / 500));
  CHECK(count(P(1, 1)) + count(P(2, 2)) + count(P(1, 0)) + count(P(2, 1)) + count(P(0, 1)) +
            count(P(1, 2)) + count(P(0, 0)) ==
        4000);
}

TEST_CASE("schedule draws are deterministic per seed, epoch and batch") {
  for (std::uint64_t e = 0; e < 20; ++e) {
    Rng a = schedule_stream(3, e, 1);
    Rng b = schedule_stream(3, e, 1);
    CHECK(select_pair(SchedulePolicy::ViDiDi, e, a) == select_pair(SchedulePolicy::ViDiDi, e, b));
  }
  CHECK(pair_frequencies(SchedulePolicy::Random12, 50, 4, 9) ==
        pair_frequencies(SchedulePolicy::Random12, 50, 4, 9));
}
