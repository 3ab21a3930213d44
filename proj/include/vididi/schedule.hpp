#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "vididi/rng.hpp"

namespace vididi {

/// Derivative orders fed to the two encoder streams.
struct ViewPairSpec {
  int order_a = 0;
  int order_b = 0;

  friend auto operator<=>(const ViewPairSpec&, const ViewPairSpec&) = default;
};

/// The seven legal pairs: orders in {0,1,2} that differ by at most one.
bool is_legal(const ViewPairSpec& pair);
const std::array<ViewPairSpec, 7>& legal_pairs();

enum class SchedulePolicy {
  Base,
  Random1,
  Random12,
  Reverse,
  Sched1,
  Sched1Mix,
  Sched12,
  Sched12Mix,
  ViDiDi,
};

const std::array<SchedulePolicy, 9>& all_policies();
std::string_view policy_name(SchedulePolicy policy);
std::optional<SchedulePolicy> parse_policy(std::string_view name);

/// Pair for `epoch` given one uniform draw `u` in [0,1) for the batch.
/// For the alternating policies `u < 0.5` increments both orders; for the
/// random policies `u` picks the pair.
ViewPairSpec select_pair(SchedulePolicy policy, std::uint64_t epoch, double u);

/// Draws `u` from `rng` and calls the overload above.
ViewPairSpec select_pair(SchedulePolicy policy, std::uint64_t epoch, Rng& rng);

/// Draw that disables the random increment (forced "high" epsilon).
inline constexpr double kForcedHighDraw = 0.999999;
inline constexpr double kForcedLowDraw = 0.0;

using PairHistogram = std::map<ViewPairSpec, std::uint64_t>;

/// Simulated run: one pair per batch, drawn from stream (seed, epoch, batch).
/// When `forced_draw` is set it replaces every random draw.
PairHistogram pair_frequencies(SchedulePolicy policy, std::uint64_t epochs,
                               std::uint64_t batches_per_epoch, std::uint64_t seed,
                               std::optional<double> forced_draw = std::nullopt);

/// Per-batch schedule stream used by training and by pair_frequencies.
Rng schedule_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t batch);

}  // namespace vididi
