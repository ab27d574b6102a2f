#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "poolscope/etwl.hpp"
#include "poolscope/liquidity.hpp"
#include "poolscope/parallel.hpp"
#include "poolscope/swap_math.hpp"

namespace poolscope {

enum class LpLabel {
  LinchpinWhale,
  DormantLinchpin,
  ActiveCriticalWhale,
  DormantCriticalWhale,
  FalsePositiveWhale,
  NonWhale,
};

inline const char* lp_label_name(LpLabel label) {
  switch (label) {
    case LpLabel::LinchpinWhale: return "LinchpinWhale";
    case LpLabel::DormantLinchpin: return "DormantLinchpin";
    case LpLabel::ActiveCriticalWhale: return "ActiveCriticalWhale";
    case LpLabel::DormantCriticalWhale: return "DormantCriticalWhale";
    case LpLabel::FalsePositiveWhale: return "FalsePositiveWhale";
    case LpLabel::NonWhale: return "NonWhale";
  }
  return "NonWhale";
}

inline LpLabel lp_label_from_name(const std::string& name) {
  for (LpLabel l : {LpLabel::LinchpinWhale, LpLabel::DormantLinchpin, LpLabel::ActiveCriticalWhale,
                    LpLabel::DormantCriticalWhale, LpLabel::FalsePositiveWhale, LpLabel::NonWhale})
    if (name == lp_label_name(l)) return l;
  throw ValidationError("unknown label: " + name);
}

struct BaselineFlags {
  bool b1 = false;  // size percentile
  bool b2 = false;  // share of peak pool liquidity
  bool b3 = false;  // size + turnover

  bool any() const { return b1 || b2 || b3; }
  friend bool operator==(const BaselineFlags&, const BaselineFlags&) = default;
};

struct ClassifierConfig {
  Decimal lsis_epsilon{"0.001"};     // below this LSIS is treated as zero
  Decimal lsis_significant{"0.01"};  // systemically meaningful
  Decimal lsis_linchpin{"10.0"};     // pool-critical
  std::size_t active_rank_max = 500;  // ETWL ranks at or below this count as active

  void validate() const {
    if (!(Decimal(0) < lsis_epsilon && lsis_epsilon < lsis_significant && lsis_significant < lsis_linchpin))
      throw ValidationError("classifier thresholds must satisfy 0 < epsilon < significant < linchpin");
    if (active_rank_max == 0) throw ValidationError("active_rank_max must be >= 1");
  }
};

struct LsisReport {
  std::string owner;
  std::size_t etwl_rank = 0;
  Decimal pi_baseline{0};  // mean |PI| over the swaps both profiles can absorb
  Decimal pi_excluded{0};
  Decimal lsis{0};
  bool lsis_infinite = false;  // exclusion left no computable swap at all
  std::size_t skipped_swaps = 0;
  std::uint64_t negative_clamps = 0;
  BaselineFlags flags;
  LpLabel label = LpLabel::NonWhale;
};

/// Pure quadrant assignment on the (LSIS, ETWL-rank) plane plus the detector
/// flags. An infinite LSIS lands in the linchpin band.
inline LpLabel classify_one(const Decimal& lsis, bool lsis_infinite, std::size_t etwl_rank,
                            const BaselineFlags& flags, const ClassifierConfig& config) {
  const bool active = etwl_rank <= config.active_rank_max;
  if (lsis_infinite || lsis >= config.lsis_linchpin)
    return active ? LpLabel::LinchpinWhale : LpLabel::DormantLinchpin;
  if (lsis < config.lsis_epsilon) return flags.any() ? LpLabel::FalsePositiveWhale : LpLabel::NonWhale;
  if (lsis >= config.lsis_significant)
    return active ? LpLabel::ActiveCriticalWhale : LpLabel::DormantCriticalWhale;
  return LpLabel::NonWhale;  // [epsilon, significant)
}

inline void classify(std::vector<LsisReport>& reports, const ClassifierConfig& config) {
  config.validate();
  for (auto& r : reports) r.label = classify_one(r.lsis, r.lsis_infinite, r.etwl_rank, r.flags, config);
}

namespace detail {

/// Nearest-rank percentile over an ascending-sorted vector: the value at
/// 1-based index ceil(p/100 * n). Membership tests use >= (ties included).
template <typename T>
const T& nearest_rank_percentile(const std::vector<T>& sorted_ascending, double pct) {
  const std::size_t n = sorted_ascending.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  if (idx == 0) idx = 1;
  if (idx > n) idx = n;
  return sorted_ascending[idx - 1];
}

struct OwnerActivity {
  BigInt total_minted{0};
  BigInt total_burned{0};
  BigInt outstanding{0};
  BigInt peak_outstanding{0};
};

inline std::map<std::string, OwnerActivity> owner_activity(const EventDataset& dataset) {
  std::map<std::string, OwnerActivity> acc;
  for (const auto& e : dataset.events) {
    OwnerActivity& a = acc[e.owner];
    if (e.type == EventType::Mint) {
      a.total_minted += BigInt(e.liquidity);
      a.outstanding += BigInt(e.liquidity);
    } else {
      a.total_burned += BigInt(e.liquidity);
      a.outstanding -= BigInt(e.liquidity);
    }
    if (a.outstanding > a.peak_outstanding) a.peak_outstanding = a.outstanding;
  }
  return acc;
}

}  // namespace detail

/// B1, static size: owners whose total minted liquidity reaches the given
/// size percentile (99th by default).
inline std::set<std::string> baseline_b1(const EventDataset& dataset, double percentile = 99.0) {
  const auto activity = detail::owner_activity(dataset);
  std::vector<BigInt> sizes;
  sizes.reserve(activity.size());
  for (const auto& [owner, a] : activity) sizes.push_back(a.total_minted);
  std::sort(sizes.begin(), sizes.end());
  const BigInt threshold = detail::nearest_rank_percentile(sizes, percentile);
  std::set<std::string> out;
  for (const auto& [owner, a] : activity)
    if (a.total_minted >= threshold) out.insert(owner);
  return out;
}

/// B2, static share: owners whose peak outstanding liquidity exceeds
/// share_threshold of the pool's peak total outstanding liquidity.
inline std::set<std::string> baseline_b2(const EventDataset& dataset, const Decimal& share_threshold = Decimal("0.01")) {
  if (!(share_threshold > 0)) throw ValidationError("share threshold must be positive");
  const auto activity = detail::owner_activity(dataset);
  BigInt pool_outstanding = 0;
  BigInt pool_peak = 0;
  for (const auto& e : dataset.events) {
    pool_outstanding += e.type == EventType::Mint ? BigInt(e.liquidity) : -BigInt(e.liquidity);
    if (pool_outstanding > pool_peak) pool_peak = pool_outstanding;
  }
  std::set<std::string> out;
  if (pool_peak <= 0) return out;
  const Decimal pool_peak_dec(pool_peak);
  for (const auto& [owner, a] : activity)
    if (Decimal(a.peak_outstanding) > share_threshold * pool_peak_dec) out.insert(owner);
  return out;
}

/// Turnover = (total minted + total burned) / final outstanding liquidity,
/// falling back to peak outstanding when the position is fully unwound.
inline Decimal turnover_ratio(const detail::OwnerActivity& a) {
  const BigInt denom = a.outstanding > 0 ? a.outstanding : a.peak_outstanding;
  if (denom <= 0) return Decimal(0);
  return Decimal(a.total_minted + a.total_burned) / Decimal(denom);
}

/// B3, behavioral activity: size at or above the 99th percentile and turnover
/// at or above the 95th, simultaneously.
inline std::set<std::string> baseline_b3(const EventDataset& dataset, double size_percentile = 99.0,
                                         double turnover_percentile = 95.0) {
  const auto activity = detail::owner_activity(dataset);
  std::vector<BigInt> sizes;
  std::vector<Decimal> turnovers;
  for (const auto& [owner, a] : activity) {
    sizes.push_back(a.total_minted);
    turnovers.push_back(turnover_ratio(a));
  }
  std::sort(sizes.begin(), sizes.end());
  std::sort(turnovers.begin(), turnovers.end());
  const BigInt size_threshold = detail::nearest_rank_percentile(sizes, size_percentile);
  const Decimal turnover_threshold = detail::nearest_rank_percentile(turnovers, turnover_percentile);
  std::set<std::string> out;
  for (const auto& [owner, a] : activity)
    if (a.total_minted >= size_threshold && turnover_ratio(a) >= turnover_threshold) out.insert(owner);
  return out;
}

struct SwapGrid {
  Decimal start{"0.0001"};
  Decimal end{"0.01"};
  Decimal step{"0.001"};
};

struct AnalysisConfig {
  std::size_t k = 100;
  Decimal lambda{"-1.5"};
  bool close_at_end = false;
  SwapGrid grid;
  std::uint64_t seed = 42;
  ClassifierConfig classifier;
  ImpactMath math = ImpactMath::Subtractive;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::optional<double> top_percentile;  // keep only the top x% of reports by LSIS
  std::optional<std::vector<SyntheticSwap>> swaps_override;  // replay an imported swap set
};

struct AnalysisOutput {
  std::vector<LsisReport> reports;  // LSIS descending (infinite first), then owner
  Decimal baseline_pi{0};           // mean |PI| over all baseline-computable swaps
  std::size_t swap_count = 0;
  std::size_t baseline_skipped = 0;
  std::set<std::string> negative_etwl_owners;
};

/// Full pipeline: rank owners by ETWL, build the baseline profile and its
/// fixed swap set, then per top-k owner rebuild the pool without them and
/// price the same swaps again. A swap either profile cannot absorb is dropped
/// from both sides of that owner's comparison, so each LSIS is a
/// like-for-like ratio. LSIS = (pi_excluded - pi_baseline) / pi_baseline,
/// zero when the baseline impact is zero, flagged infinite when exclusion
/// leaves nothing computable.
inline AnalysisOutput run_analysis(const EventDataset& dataset, const AnalysisConfig& config) {
  if (dataset.events.empty()) throw ValidationError("empty dataset");
  if (config.k == 0) throw ValidationError("k must be >= 1");
  config.classifier.validate();

  AnalysisOutput out;
  const auto scores = compute_etwl(dataset, config.lambda, config.close_at_end);
  const auto top = rank_lps(scores, config.k, &out.negative_etwl_owners);

  const LiquidityProfile baseline = build_liquidity_profile(dataset);
  if (baseline.empty()) throw RuntimeError("baseline profile is empty");
  const std::vector<SyntheticSwap> swaps =
      config.swaps_override ? *config.swaps_override
                            : generate_synthetic_swaps(baseline, config.grid.start, config.grid.end,
                                                       config.grid.step, config.seed);
  if (swaps.empty()) throw RuntimeError("no synthetic swaps: pool has no active liquidity");
  out.swap_count = swaps.size();

  const auto baseline_mags = per_swap_magnitudes(swaps, baseline, nullptr, config.math);
  std::vector<Decimal> baseline_ok;
  for (const auto& m : baseline_mags)
    if (m) baseline_ok.push_back(*m);
  if (baseline_ok.empty()) throw RuntimeError("no measurable impact: every baseline swap exceeds pool capacity");
  out.baseline_skipped = swaps.size() - baseline_ok.size();
  out.baseline_pi = pairwise_sum(baseline_ok) / Decimal(baseline_ok.size());

  const auto b1 = baseline_b1(dataset);
  const auto b2 = baseline_b2(dataset);
  const auto b3 = baseline_b3(dataset);

  out.reports.resize(top.size());
  parallel_for(top.size(), config.threads, [&](std::size_t i) {
    const EtwlEntry& entry = top[i];
    LsisReport r;
    r.owner = entry.owner;
    r.etwl_rank = entry.rank;
    r.flags.b1 = b1.count(entry.owner) > 0;
    r.flags.b2 = b2.count(entry.owner) > 0;
    r.flags.b3 = b3.count(entry.owner) > 0;

    const LiquidityProfile excluded = build_liquidity_profile(dataset, entry.owner);
    LiquidityLookupStats stats;
    const auto excluded_mags = per_swap_magnitudes(swaps, excluded, &stats, config.math);
    r.negative_clamps = stats.negative_clamps;

    std::vector<Decimal> common_baseline;
    std::vector<Decimal> common_excluded;
    for (std::size_t s = 0; s < swaps.size(); ++s) {
      if (baseline_mags[s] && excluded_mags[s]) {
        common_baseline.push_back(*baseline_mags[s]);
        common_excluded.push_back(*excluded_mags[s]);
      }
    }
    r.skipped_swaps = swaps.size() - common_baseline.size();
    if (common_baseline.empty()) {
      // Removing this owner leaves no swap the pool can absorb.
      r.lsis_infinite = true;
      r.pi_baseline = out.baseline_pi;
      r.pi_excluded = 0;
      r.lsis = 0;
    } else {
      const Decimal n(common_baseline.size());
      r.pi_baseline = pairwise_sum(common_baseline) / n;
      r.pi_excluded = pairwise_sum(common_excluded) / n;
      r.lsis = r.pi_baseline > 0 ? (r.pi_excluded - r.pi_baseline) / r.pi_baseline : Decimal(0);
    }
    out.reports[i] = std::move(r);
  });

  std::sort(out.reports.begin(), out.reports.end(), [](const LsisReport& a, const LsisReport& b) {
    if (a.lsis_infinite != b.lsis_infinite) return a.lsis_infinite;
    if (a.lsis != b.lsis) return a.lsis > b.lsis;
    return a.owner < b.owner;
  });
  classify(out.reports, config.classifier);

  if (config.top_percentile) {
    const double pct = *config.top_percentile;
    if (pct <= 0 || pct > 100) throw ValidationError("top percentile must be in (0, 100]");
    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(out.reports.size()))));
    if (out.reports.size() > keep) out.reports.resize(keep);
  }
  return out;
}

inline std::string format_lsis(const LsisReport& r) { return r.lsis_infinite ? "inf" : format_decimal(r.lsis); }

inline void write_reports_csv(const std::vector<LsisReport>& reports, std::ostream& out) {
  out << "owner,etwl_rank,pi_baseline,pi_excluded,lsis,skipped_swaps,b1,b2,b3,label\n";
  for (const auto& r : reports) {
    out << r.owner << ',' << r.etwl_rank << ',' << format_decimal(r.pi_baseline) << ','
        << format_decimal(r.pi_excluded) << ',' << format_lsis(r) << ',' << r.skipped_swaps << ','
        << (r.flags.b1 ? "true" : "false") << ',' << (r.flags.b2 ? "true" : "false") << ','
        << (r.flags.b3 ? "true" : "false") << ',' << lp_label_name(r.label) << '\n';
  }
}

inline nlohmann::ordered_json report_to_json(const LsisReport& r) {
  nlohmann::ordered_json j;
  j["owner"] = r.owner;
  j["etwl_rank"] = r.etwl_rank;
  j["pi_baseline"] = format_decimal(r.pi_baseline);
  j["pi_excluded"] = format_decimal(r.pi_excluded);
  j["lsis"] = format_lsis(r);
  j["skipped_swaps"] = r.skipped_swaps;
  j["negative_clamps"] = r.negative_clamps;
  j["b1"] = r.flags.b1;
  j["b2"] = r.flags.b2;
  j["b3"] = r.flags.b3;
  j["label"] = lp_label_name(r.label);
  return j;
}

inline LsisReport report_from_json(const nlohmann::json& j) {
  LsisReport r;
  r.owner = canonical_address(j.at("owner").get<std::string>());
  r.etwl_rank = j.at("etwl_rank").get<std::size_t>();
  r.pi_baseline = Decimal(j.at("pi_baseline").get<std::string>());
  r.pi_excluded = Decimal(j.at("pi_excluded").get<std::string>());
  const std::string lsis = j.at("lsis").get<std::string>();
  if (lsis == "inf") {
    r.lsis_infinite = true;
  } else {
    r.lsis = Decimal(lsis);
  }
  r.skipped_swaps = j.at("skipped_swaps").get<std::size_t>();
  if (j.contains("negative_clamps")) r.negative_clamps = j.at("negative_clamps").get<std::uint64_t>();
  r.flags.b1 = j.at("b1").get<bool>();
  r.flags.b2 = j.at("b2").get<bool>();
  r.flags.b3 = j.at("b3").get<bool>();
  if (j.contains("label")) r.label = lp_label_from_name(j.at("label").get<std::string>());
  return r;
}

}  // namespace poolscope
