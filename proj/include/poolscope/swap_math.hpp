#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "poolscope/liquidity.hpp"
#include "poolscope/numeric.hpp"
#include "poolscope/rng.hpp"

namespace poolscope {

/// Pool sqrt price in Q64.96 fixed point: sqrt(P) scaled by 2^96.
struct SqrtPriceX96 {
  U256 raw{};

  friend bool operator==(const SqrtPriceX96&, const SqrtPriceX96&) = default;
};

inline Decimal tick_to_price(std::int32_t tick) {
  if (tick < kMinTick || tick > kMaxTick) throw ValidationError("tick outside global bounds");
  static const Decimal base("1.0001");
  return pow(base, tick);
}

// raw / 2^96 == raw * 5^96 / 10^96, which has a terminating decimal
// expansion, so the conversion is built from the digit string directly and is
// correctly rounded (a plain Decimal division is not).
inline Decimal sqrtx96_to_sqrtp(const SqrtPriceX96& x) {
  if (x.raw == 0) throw ValidationError("sqrtPriceX96 must be positive");
  static const BigInt five96 = boost::multiprecision::pow(BigInt(5), 96);
  std::string digits = (BigInt(x.raw) * five96).str();
  if (digits.size() <= 96) digits.insert(0, std::string(96 - digits.size() + 1, '0'));
  digits.insert(digits.size() - 96, ".");
  return Decimal(digits);
}

/// Rounds to the nearest representable raw value (half away from zero).
inline SqrtPriceX96 sqrtp_to_sqrtx96(const Decimal& sqrt_p) {
  if (sqrt_p <= 0) throw ValidationError("sqrt price must be positive");
  const BigInt raw = floor(sqrt_p * Decimal(q96()) + Decimal("0.5")).convert_to<BigInt>();
  if (raw <= 0) throw ValidationError("sqrt price rounds below the Q96 scale");
  if (raw > (BigInt(1) << 256) - 1) throw ValidationError("sqrt price exceeds the Q96 representable range");
  SqrtPriceX96 out;
  out.raw = raw.convert_to<U256>();
  return out;
}

inline Decimal swap_volume_dx(const Decimal& liquidity, const Decimal& sqrt_pa, const Decimal& sqrt_pb) {
  if (liquidity < 0) throw ValidationError("liquidity must be non-negative");
  if (sqrt_pa <= 0 || sqrt_pb <= 0) throw ValidationError("sqrt prices must be positive");
  return liquidity * abs(Decimal(1) / sqrt_pb - Decimal(1) / sqrt_pa);
}

inline Decimal swap_volume_dy(const Decimal& liquidity, const Decimal& sqrt_pa, const Decimal& sqrt_pb) {
  if (liquidity < 0) throw ValidationError("liquidity must be non-negative");
  if (sqrt_pa <= 0 || sqrt_pb <= 0) throw ValidationError("sqrt prices must be positive");
  return liquidity * abs(sqrt_pb - sqrt_pa);
}

/// One fixed hypothetical trade. Exactly one of the input amounts is nonzero;
/// `liquidity` and `sqrt_price_x96` are captured at generation time so the
/// same swap set replays against counterfactual profiles.
struct SyntheticSwap {
  std::int32_t tick = 0;
  Decimal amount0_in{0};  // token0 sold (token0 -> token1 swap)
  Decimal amount1_in{0};  // token1 sold (token1 -> token0 swap)
  BigInt liquidity{0};
  SqrtPriceX96 sqrt_price_x96;
};

struct PriceImpact {
  Decimal percent{0};    // signed, per the directional formulas
  Decimal magnitude{0};  // |percent|
};

enum class ImpactStatus {
  Ok,
  NoLiquidity,      // no active liquidity at the swap tick
  ExceedsCapacity,  // swap would exhaust the single-tick price range
};

struct ImpactResult {
  ImpactStatus status = ImpactStatus::Ok;
  PriceImpact impact;

  bool ok() const { return status == ImpactStatus::Ok; }
};

/// Token0 direction: the canonical single-tick update divides by L + dx*sqrtP
/// instead of L - dx*sqrtP, so the sqrt price falls when token0 is sold.
/// Kept as a comparison mode; Subtractive is the operating default.
enum class ImpactMath { Subtractive, Canonical };

/// Signed price impact of one swap against active liquidity L at its tick.
///
/// Selling token0: P_f = L*P_i / (L -+ dX*P_i), PI = (P_i^2 - P_f^2)/P_i^2 * 100.
/// Selling token1: P_f = P_i - dY/L,            PI = (P_f^2 - P_i^2)/P_i^2 * 100.
/// (P_i, P_f are sqrt prices.) Both expressions are evaluated in a factored
/// form that avoids the near-cancellation of the squares for small trades.
inline ImpactResult price_impact(const SyntheticSwap& swap, const BigInt& active_liquidity,
                                 ImpactMath math = ImpactMath::Subtractive) {
  if (active_liquidity <= 0) return {ImpactStatus::NoLiquidity, {}};
  const Decimal liq(active_liquidity);
  const Decimal sqrt_pi = sqrtx96_to_sqrtp(swap.sqrt_price_x96);

  Decimal percent;
  if (swap.amount0_in > 0) {
    const Decimal scaled = swap.amount0_in * sqrt_pi;  // dX * P_i
    if (math == ImpactMath::Subtractive) {
      const Decimal denom = liq - scaled;
      if (denom <= 0) return {ImpactStatus::ExceedsCapacity, {}};
      // P_f/P_i = 1 + u with u = dX*P_i/(L - dX*P_i); PI = -u(2+u)*100.
      const Decimal u = scaled / denom;
      percent = -u * (Decimal(2) + u) * 100;
    } else {
      // P_f/P_i = 1 - u with u = dX*P_i/(L + dX*P_i); PI = u(2-u)*100.
      const Decimal u = scaled / (liq + scaled);
      percent = u * (Decimal(2) - u) * 100;
    }
  } else {
    // P_f = P_i*(1 - u) with u = dY/(L*P_i); PI = -u(2-u)*100.
    const Decimal u = swap.amount1_in / (liq * sqrt_pi);
    if (u >= 1) return {ImpactStatus::ExceedsCapacity, {}};
    percent = -u * (Decimal(2) - u) * 100;
  }
  ImpactResult res;
  res.status = ImpactStatus::Ok;
  res.impact.percent = percent;
  res.impact.magnitude = abs(percent);
  return res;
}

/// Grid-sampled swap set over every tick with positive active liquidity. Per
/// emitted tick one sqrt price is drawn uniformly from [2^95, 2^100] (ticks
/// with zero liquidity draw nothing), reserves are estimated as L/sqrt_p and
/// L*sqrt_p, and each grid percentage yields one swap per direction. The
/// draw order is ticks ascending, so a (profile, seed) pair pins the set.
inline std::vector<SyntheticSwap> generate_synthetic_swaps(const LiquidityProfile& profile, const Decimal& pct_start,
                                                           const Decimal& pct_end, const Decimal& step,
                                                           std::uint64_t seed) {
  if (!(pct_start > 0) || pct_start > pct_end) throw ValidationError("need 0 < pct_start <= pct_end");
  if (!(step > 0)) throw ValidationError("step must be positive");

  std::vector<Decimal> percentages;
  for (Decimal pct = pct_start; pct <= pct_end; pct += step) percentages.push_back(pct);

  std::vector<SyntheticSwap> swaps;
  if (profile.empty()) return swaps;

  static const U128 lo = U128(1) << 95;
  static const U128 hi = U128(1) << 100;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < profile.ticks.size(); ++i) {
    const BigInt liquidity = profile.cumulative[i] < 0 ? BigInt(0) : profile.cumulative[i];
    if (liquidity == 0) continue;
    SqrtPriceX96 price;
    price.raw = U256(rng.uniform_u128_inclusive(lo, hi));
    const Decimal sqrt_p = sqrtx96_to_sqrtp(price);
    const Decimal dec_liq(liquidity);
    const Decimal reserve0 = dec_liq / sqrt_p;
    const Decimal reserve1 = dec_liq * sqrt_p;
    for (const Decimal& pct : percentages) {
      SyntheticSwap sell0;
      sell0.tick = profile.ticks[i];
      sell0.amount0_in = reserve0 * pct;
      sell0.liquidity = liquidity;
      sell0.sqrt_price_x96 = price;
      swaps.push_back(std::move(sell0));

      SyntheticSwap sell1;
      sell1.tick = profile.ticks[i];
      sell1.amount1_in = reserve1 * pct;
      sell1.liquidity = liquidity;
      sell1.sqrt_price_x96 = price;
      swaps.push_back(std::move(sell1));
    }
  }
  return swaps;
}

/// Deterministic pairwise tree sum; the reduction order depends only on the
/// element order, never on thread scheduling.
inline Decimal pairwise_sum(std::span<const Decimal> values) {
  if (values.empty()) return Decimal(0);
  if (values.size() == 1) return values[0];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

/// Per-swap impact magnitudes with liquidity re-resolved against `profile`
/// (not the captured generation-time value); nullopt marks swaps the profile
/// cannot absorb. This re-resolution is what makes counterfactual replay work.
inline std::vector<std::optional<Decimal>> per_swap_magnitudes(const std::vector<SyntheticSwap>& swaps,
                                                               const LiquidityProfile& profile,
                                                               LiquidityLookupStats* stats = nullptr,
                                                               ImpactMath math = ImpactMath::Subtractive) {
  std::vector<std::optional<Decimal>> out;
  out.reserve(swaps.size());
  for (const auto& swap : swaps) {
    const BigInt liquidity = active_liquidity_at(profile, swap.tick, stats);
    const ImpactResult res = price_impact(swap, liquidity, math);
    if (res.ok())
      out.push_back(res.impact.magnitude);
    else
      out.push_back(std::nullopt);
  }
  return out;
}

struct AveragePiResult {
  Decimal mean_magnitude{0};
  Decimal mean_signed{0};
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::uint64_t negative_clamps = 0;
};

/// Mean absolute price impact of the swap set against a profile. Swaps the
/// profile cannot absorb are skipped and counted; if none are computable the
/// pool has no measurable impact and that is an error. The signed mean (raw
/// directional percentages) rides along for diagnostic use.
inline AveragePiResult calculate_average_pi(const std::vector<SyntheticSwap>& swaps, const LiquidityProfile& profile,
                                            ImpactMath math = ImpactMath::Subtractive) {
  if (swaps.empty()) throw ValidationError("swap set is empty");
  LiquidityLookupStats stats;
  std::vector<Decimal> magnitudes;
  std::vector<Decimal> signed_values;
  magnitudes.reserve(swaps.size());
  AveragePiResult res;
  for (const auto& swap : swaps) {
    const BigInt liquidity = active_liquidity_at(profile, swap.tick, &stats);
    const ImpactResult impact = price_impact(swap, liquidity, math);
    if (!impact.ok()) {
      ++res.skipped;
      continue;
    }
    magnitudes.push_back(impact.impact.magnitude);
    signed_values.push_back(impact.impact.percent);
  }
  if (magnitudes.empty()) throw RuntimeError("no measurable impact: every swap exceeds pool capacity");
  res.used = magnitudes.size();
  res.negative_clamps = stats.negative_clamps;
  res.mean_magnitude = pairwise_sum(magnitudes) / Decimal(res.used);
  res.mean_signed = pairwise_sum(signed_values) / Decimal(res.used);
  return res;
}

/// Full-precision decimal text; swap-set files must survive a round-trip
/// bit-exactly, unlike report output which trims to 30 digits.
inline std::string format_decimal_full(const Decimal& d) { return d.str(); }

inline std::string swap_to_jsonl(const SyntheticSwap& swap, std::uint64_t seed) {
  std::string out = "{\"tick\":" + std::to_string(swap.tick);
  out += ",\"amount0\":\"" + format_decimal_full(swap.amount0_in);
  out += "\",\"amount1\":\"" + format_decimal_full(swap.amount1_in);
  out += "\",\"liquidity\":\"" + swap.liquidity.str();
  out += "\",\"sqrtPriceX96\":\"" + BigInt(swap.sqrt_price_x96.raw).str();
  out += "\",\"seed\":" + std::to_string(seed) + "}";
  return out;
}

inline void write_swaps_jsonl(const std::vector<SyntheticSwap>& swaps, std::uint64_t seed, std::ostream& out) {
  for (const auto& s : swaps) out << swap_to_jsonl(s, seed) << '\n';
}

inline std::vector<SyntheticSwap> read_swaps_jsonl(std::istream& in) {
  std::vector<SyntheticSwap> swaps;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    SyntheticSwap s;
    s.tick = detail::parse_tick(j.at("tick"), "tick");
    s.amount0_in = Decimal(j.at("amount0").get<std::string>());
    s.amount1_in = Decimal(j.at("amount1").get<std::string>());
    if (s.amount0_in < 0 || s.amount1_in < 0) throw ValidationError("negative swap amount");
    if ((s.amount0_in > 0) == (s.amount1_in > 0)) throw ValidationError("swap must sell exactly one token");
    s.liquidity = BigInt(j.at("liquidity").get<std::string>());
    s.sqrt_price_x96.raw = detail::parse_u256(j.at("sqrtPriceX96"), "sqrtPriceX96");
    if (s.sqrt_price_x96.raw == 0) throw ValidationError("sqrtPriceX96 must be positive");
    swaps.push_back(std::move(s));
  }
  return swaps;
}

}  // namespace poolscope
