#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "poolscope/events.hpp"
#include "poolscope/numeric.hpp"

namespace poolscope {

/// Exponentially time-weighted liquidity per owner. Between an owner's
/// consecutive events, the liquidity they held accrues weighted by
/// exp(lambda * (1 - normalized_time)) where normalized_time positions the
/// interval start inside the dataset's block range. Nothing accrues after an
/// owner's last event unless `close_at_end` synthesizes a terminal checkpoint
/// at max_block. A single-block dataset uses normalized_time = 0 throughout.
///
/// Scores can go negative when a truncated history burns before minting;
/// they are kept raw here and floored at ranking time.
inline std::map<std::string, Decimal> compute_etwl(const EventDataset& dataset, const Decimal& lambda,
                                                   bool close_at_end = false) {
  if (dataset.events.empty()) throw ValidationError("empty dataset");

  struct OwnerState {
    BigInt current_liquidity{0};
    std::uint64_t last_block = 0;
    bool seen = false;
  };

  const std::uint64_t min_block = dataset.min_block;
  const std::uint64_t range = dataset.block_range();
  const Decimal dec_range(range);

  auto decay_weight = [&](std::uint64_t interval_start) {
    Decimal normalized_time = range == 0 ? Decimal(0) : Decimal(interval_start - min_block) / dec_range;
    return exp(lambda * (Decimal(1) - normalized_time));
  };

  std::map<std::string, Decimal> totals;
  std::unordered_map<std::string, OwnerState> states;
  // The dataset is globally (block, log_index)-sorted, so each owner's events
  // already stream in that order.
  for (const auto& e : dataset.events) {
    OwnerState& st = states[e.owner];
    Decimal& total = totals[e.owner];
    if (st.seen) {
      const std::uint64_t delta_blocks = e.block_number - st.last_block;
      if (delta_blocks > 0 && st.current_liquidity != 0)
        total += Decimal(st.current_liquidity) * Decimal(delta_blocks) * decay_weight(st.last_block);
    }
    const BigInt delta = e.type == EventType::Mint ? BigInt(e.liquidity) : -BigInt(e.liquidity);
    st.current_liquidity += delta;
    st.last_block = e.block_number;
    st.seen = true;
  }

  if (close_at_end) {
    for (auto& [owner, st] : states) {
      const std::uint64_t delta_blocks = dataset.max_block - st.last_block;
      if (delta_blocks > 0 && st.current_liquidity != 0)
        totals[owner] += Decimal(st.current_liquidity) * Decimal(delta_blocks) * decay_weight(st.last_block);
    }
  }
  return totals;
}

struct EtwlEntry {
  std::string owner;
  Decimal score;     // floored at zero
  std::size_t rank;  // 1-based, over all scored owners

  friend bool operator==(const EtwlEntry&, const EtwlEntry&) = default;
};

/// Descending score, ties broken by ascending address, truncated to k.
/// Negative raw totals are floored to zero here and reported through
/// `flagged_negative` so diagnostics can surface them.
inline std::vector<EtwlEntry> rank_lps(const std::map<std::string, Decimal>& scores, std::size_t k,
                                       std::set<std::string>* flagged_negative = nullptr) {
  if (k == 0) throw ValidationError("k must be >= 1");
  std::vector<EtwlEntry> entries;
  entries.reserve(scores.size());
  for (const auto& [owner, raw] : scores) {
    Decimal floored = raw;
    if (floored < 0) {
      floored = 0;
      if (flagged_negative) flagged_negative->insert(owner);
    }
    entries.push_back({owner, floored, 0});
  }
  std::sort(entries.begin(), entries.end(), [](const EtwlEntry& a, const EtwlEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.owner < b.owner;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
  if (entries.size() > k) entries.resize(k);
  return entries;
}

/// Spearman rank correlation between two rankings of the same owner set.
/// Ranks are the deterministic 1..N positions assigned by rank_lps, so the
/// distinct-rank formula applies exactly.
inline Decimal spearman_rank_correlation(const std::vector<EtwlEntry>& a, const std::vector<EtwlEntry>& b) {
  if (a.size() != b.size()) throw ValidationError("rankings cover different owner sets");
  const std::size_t n = a.size();
  if (n <= 1) return Decimal(1);
  std::unordered_map<std::string, std::size_t> rank_b;
  for (const auto& e : b) rank_b[e.owner] = e.rank;
  BigInt sum_d2 = 0;
  for (const auto& e : a) {
    auto it = rank_b.find(e.owner);
    if (it == rank_b.end()) throw ValidationError("rankings cover different owner sets");
    const BigInt d = BigInt(e.rank) - BigInt(it->second);
    sum_d2 += d * d;
  }
  // rho = (denom - 6*sum_d2) / denom, reduced exactly when it divides evenly
  // so the +-1 endpoints come out bit-exact
  const BigInt denom = BigInt(n) * (BigInt(n) * BigInt(n) - 1);
  const BigInt numerator = denom - 6 * sum_d2;
  if (numerator % denom == 0) return Decimal(numerator / denom);
  return Decimal(numerator) / Decimal(denom);
}

struct LambdaSweepRow {
  Decimal lambda;
  Decimal spearman;                  // ETWL ranks vs unweighted liquidity-time ranks
  Decimal top_k_overlap_vs_default;  // fraction of the default-lambda top-k retained
  std::vector<EtwlEntry> top_k;
};

/// Evaluates each lambda against the unweighted liquidity-time ranking
/// (exactly the lambda = 0 scores) and against the default-lambda top-k.
inline std::vector<LambdaSweepRow> lambda_sweep(const EventDataset& dataset, const std::vector<Decimal>& lambdas,
                                                std::size_t k, const Decimal& default_lambda = Decimal("-1.5")) {
  if (lambdas.size() < 2) throw ValidationError("lambda sweep needs at least 2 values");
  const auto raw_scores = compute_etwl(dataset, Decimal(0));
  const auto raw_full = rank_lps(raw_scores, raw_scores.size());
  const auto default_top = rank_lps(compute_etwl(dataset, default_lambda), k);
  std::set<std::string> default_set;
  for (const auto& e : default_top) default_set.insert(e.owner);

  std::vector<LambdaSweepRow> rows;
  rows.reserve(lambdas.size());
  for (const auto& lambda : lambdas) {
    const auto scores = compute_etwl(dataset, lambda);
    const auto full = rank_lps(scores, scores.size());
    auto top = full;
    if (top.size() > k) top.resize(k);
    std::size_t overlap = 0;
    for (const auto& e : top)
      if (default_set.count(e.owner)) ++overlap;
    LambdaSweepRow row;
    row.lambda = lambda;
    row.spearman = spearman_rank_correlation(full, raw_full);
    row.top_k_overlap_vs_default = top.empty() ? Decimal(1) : Decimal(overlap) / Decimal(top.size());
    row.top_k = std::move(top);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_ranking_csv(const std::vector<EtwlEntry>& entries, std::ostream& out) {
  out << "rank,owner,etwl_score\n";
  for (const auto& e : entries) out << e.rank << ',' << e.owner << ',' << format_decimal(e.score) << '\n';
}

inline void write_sweep_csv(const std::vector<LambdaSweepRow>& rows, std::ostream& out) {
  out << "lambda,spearman,top_k_overlap_vs_default\n";
  for (const auto& r : rows)
    out << format_decimal(r.lambda) << ',' << format_decimal(r.spearman) << ','
        << format_decimal(r.top_k_overlap_vs_default) << '\n';
}

}  // namespace poolscope
