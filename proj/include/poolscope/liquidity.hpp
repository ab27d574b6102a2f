#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "poolscope/events.hpp"
#include "poolscope/numeric.hpp"

namespace poolscope {

/// Per-tick net-liquidity reconstruction: sorted unique ticks plus the running
/// prefix sum of signed deltas. Every tick an event touched is kept, even when
/// its aggregated delta cancels to zero. Immutable once built.
struct LiquidityProfile {
  std::vector<std::int32_t> ticks;      // strictly increasing
  std::vector<BigInt> cumulative;       // same length; prefix sums of net deltas
  std::optional<std::string> excluded_lp;

  bool empty() const { return ticks.empty(); }
};

struct LiquidityLookupStats {
  std::uint64_t negative_clamps = 0;  // lookups that hit a negative cumulative value
};

/// Mint adds liquidity at tick_lower and removes it at tick_upper; burn is the
/// mirror image. Events owned by `excluded_lp` are skipped entirely, which is
/// how counterfactual states are produced.
inline LiquidityProfile build_liquidity_profile(const EventDataset& dataset,
                                                std::optional<std::string> excluded_lp = std::nullopt) {
  std::map<std::int32_t, BigInt> net_delta;
  for (const auto& e : dataset.events) {
    if (excluded_lp && e.owner == *excluded_lp) continue;
    const BigInt delta = e.type == EventType::Mint ? BigInt(e.liquidity) : -BigInt(e.liquidity);
    net_delta[e.tick_lower] += delta;
    net_delta[e.tick_upper] -= delta;
  }
  LiquidityProfile profile;
  profile.excluded_lp = std::move(excluded_lp);
  profile.ticks.reserve(net_delta.size());
  profile.cumulative.reserve(net_delta.size());
  BigInt running = 0;
  for (const auto& [tick, delta] : net_delta) {
    running += delta;
    profile.ticks.push_back(tick);
    profile.cumulative.push_back(running);
  }
  return profile;
}

/// Active liquidity at `tick`: the cumulative value at the greatest
/// initialized tick <= tick, zero below the first tick or on an empty
/// profile. Negative values (possible under exclusion) clamp to zero and are
/// counted through `stats`.
inline BigInt active_liquidity_at(const LiquidityProfile& profile, std::int32_t tick,
                                  LiquidityLookupStats* stats = nullptr) {
  if (profile.ticks.empty() || tick < profile.ticks.front()) return 0;
  auto it = std::upper_bound(profile.ticks.begin(), profile.ticks.end(), tick);
  const std::size_t idx = static_cast<std::size_t>(it - profile.ticks.begin()) - 1;
  const BigInt& value = profile.cumulative[idx];
  if (value < 0) {
    if (stats) ++stats->negative_clamps;
    return 0;
  }
  return value;
}

/// Baseline profile with one hypothetical burn applied on [tick_lower,
/// tick_upper). Used by the withdrawal gate; the source profile is untouched.
inline LiquidityProfile apply_hypothetical_burn(const LiquidityProfile& profile, std::int32_t tick_lower,
                                                std::int32_t tick_upper, const U128& liquidity) {
  if (tick_lower >= tick_upper) throw ValidationError("tick_lower must be < tick_upper");
  std::map<std::int32_t, BigInt> net_delta;
  BigInt previous = 0;
  for (std::size_t i = 0; i < profile.ticks.size(); ++i) {
    net_delta[profile.ticks[i]] = profile.cumulative[i] - previous;
    previous = profile.cumulative[i];
  }
  net_delta[tick_lower] -= BigInt(liquidity);
  net_delta[tick_upper] += BigInt(liquidity);
  LiquidityProfile out;
  out.excluded_lp = profile.excluded_lp;
  BigInt running = 0;
  for (const auto& [tick, delta] : net_delta) {
    running += delta;
    out.ticks.push_back(tick);
    out.cumulative.push_back(running);
  }
  return out;
}

inline void write_profile_csv(const LiquidityProfile& profile, std::ostream& out) {
  out << "tick,cumulative_liquidity\n";
  for (std::size_t i = 0; i < profile.ticks.size(); ++i)
    out << profile.ticks[i] << ',' << profile.cumulative[i].str() << '\n';
}

}  // namespace poolscope
