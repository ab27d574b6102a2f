#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "poolscope/counterfactual.hpp"
#include "poolscope/events.hpp"
#include "poolscope/liquidity.hpp"
#include "poolscope/swap_math.hpp"

namespace poolscope {

struct BurnRequest {
  std::string owner;
  std::int32_t tick_lower = 0;
  std::int32_t tick_upper = 0;
  U128 liquidity{};
  std::string request_id;
  // Reserved for a future volatility feed; accepted on the wire, not yet part
  // of the verdict.
  std::optional<Decimal> volatility;
};

enum class Verdict { Allow, Deny, Suspend };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Allow: return "Allow";
    case Verdict::Deny: return "Deny";
    case Verdict::Suspend: return "Suspend";
  }
  return "Deny";
}

struct GateDecision {
  Verdict verdict = Verdict::Deny;
  Decimal projected_degradation{0};
  bool degradation_infinite = false;
  BigInt depth_before{0};  // worst-case active liquidity in the reference window
  BigInt depth_after{0};
  std::string reason;
};

struct GateThresholds {
  Decimal allow_threshold{"0.005"};
  Decimal deny_threshold{"0.05"};
  BigInt min_depth{0};
  std::int32_t depth_window = 100;  // ticks either side of the reference tick
  std::optional<std::int32_t> reference_tick;  // default: midpoint of the request range

  void validate() const {
    if (!(allow_threshold >= 0 && deny_threshold >= allow_threshold))
      throw ValidationError("need 0 <= allow_threshold <= deny_threshold");
    if (depth_window < 0) throw ValidationError("depth window must be non-negative");
  }
};

/// Everything an evaluation needs, precomputed once and then shared
/// immutably: the baseline profile, the fixed swap set with its baseline
/// impact vector, and a per-owner position index for withdrawal validation.
class GateState {
 public:
  static GateState build(EventDataset dataset, const SwapGrid& grid, std::uint64_t seed,
                         ImpactMath math = ImpactMath::Subtractive) {
    GateState s;
    s.math_ = math;
    s.dataset_ = std::move(dataset);
    s.baseline_ = build_liquidity_profile(s.dataset_);
    s.swaps_ = generate_synthetic_swaps(s.baseline_, grid.start, grid.end, grid.step, seed);
    if (!s.swaps_.empty()) {
      s.baseline_magnitudes_ = per_swap_magnitudes(s.swaps_, s.baseline_, nullptr, math);
      std::vector<Decimal> ok;
      for (const auto& m : s.baseline_magnitudes_)
        if (m) ok.push_back(*m);
      if (!ok.empty()) {
        s.baseline_pi_ = pairwise_sum(ok) / Decimal(ok.size());
        s.baseline_healthy_ = true;
      }
    }
    for (const auto& e : s.dataset_.events) {
      BigInt& net = s.positions_[e.owner][{e.tick_lower, e.tick_upper}];
      net += e.type == EventType::Mint ? BigInt(e.liquidity) : -BigInt(e.liquidity);
    }
    return s;
  }

  const EventDataset& dataset() const { return dataset_; }
  const LiquidityProfile& baseline() const { return baseline_; }
  const std::vector<SyntheticSwap>& swaps() const { return swaps_; }
  const std::vector<std::optional<Decimal>>& baseline_magnitudes() const { return baseline_magnitudes_; }
  const Decimal& baseline_pi() const { return baseline_pi_; }
  bool baseline_healthy() const { return baseline_healthy_; }
  ImpactMath math() const { return math_; }

  /// Net outstanding liquidity the owner holds on positions overlapping
  /// [tick_lower, tick_upper). Per-position nets are clamped at zero.
  BigInt outstanding_overlapping(const std::string& owner, std::int32_t tick_lower, std::int32_t tick_upper) const {
    auto it = positions_.find(owner);
    if (it == positions_.end()) return 0;
    BigInt total = 0;
    for (const auto& [range, net] : it->second)
      if (range.first < tick_upper && range.second > tick_lower && net > 0) total += net;
    return total;
  }

 private:
  EventDataset dataset_;
  LiquidityProfile baseline_;
  std::vector<SyntheticSwap> swaps_;
  std::vector<std::optional<Decimal>> baseline_magnitudes_;
  Decimal baseline_pi_{0};
  bool baseline_healthy_ = false;
  ImpactMath math_ = ImpactMath::Subtractive;
  std::map<std::string, std::map<std::pair<std::int32_t, std::int32_t>, BigInt>> positions_;
};

namespace detail {

/// Worst-case (minimum) active liquidity over [ref - window, ref + window].
/// Active liquidity is piecewise constant, so evaluating at the window start
/// and at every initialized tick inside the window covers all values.
inline BigInt window_depth(const LiquidityProfile& profile, std::int32_t reference, std::int32_t window) {
  const std::int64_t lo64 = std::max<std::int64_t>(kMinTick, std::int64_t(reference) - window);
  const std::int64_t hi64 = std::min<std::int64_t>(kMaxTick, std::int64_t(reference) + window);
  const auto lo = static_cast<std::int32_t>(lo64);
  const auto hi = static_cast<std::int32_t>(hi64);
  BigInt depth = active_liquidity_at(profile, lo);
  for (std::size_t i = 0; i < profile.ticks.size(); ++i) {
    if (profile.ticks[i] <= lo) continue;
    if (profile.ticks[i] > hi) break;
    const BigInt v = profile.cumulative[i] < 0 ? BigInt(0) : profile.cumulative[i];
    if (v < depth) depth = v;
  }
  return depth;
}

}  // namespace detail

/// Read-only stability check for one proposed withdrawal: subtract the
/// requested liquidity on its range, reprice the fixed swap set, and compare
/// the projected mean-impact degradation and post-burn depth against the
/// thresholds.
inline GateDecision evaluate_burn(const BurnRequest& request, const GateState& state,
                                  const GateThresholds& thresholds) {
  thresholds.validate();
  if (request.tick_lower >= request.tick_upper) throw ValidationError("tick_lower must be < tick_upper");
  if (request.tick_lower < kMinTick || request.tick_upper > kMaxTick)
    throw ValidationError("tick outside global bounds");
  if (request.liquidity == 0) throw ValidationError("liquidity must be positive");
  const std::string owner = canonical_address(request.owner);

  GateDecision decision;
  const std::int32_t reference = thresholds.reference_tick.value_or(
      static_cast<std::int32_t>((std::int64_t(request.tick_lower) + request.tick_upper) / 2));
  decision.depth_before = detail::window_depth(state.baseline(), reference, thresholds.depth_window);
  decision.depth_after = decision.depth_before;

  const BigInt held = state.outstanding_overlapping(owner, request.tick_lower, request.tick_upper);
  if (BigInt(request.liquidity) > held) {
    decision.verdict = Verdict::Deny;
    decision.reason = "insufficient position";
    return decision;
  }
  if (!state.baseline_healthy()) {
    decision.verdict = Verdict::Suspend;
    decision.reason = "oracle degraded";
    return decision;
  }

  const LiquidityProfile hypothetical =
      apply_hypothetical_burn(state.baseline(), request.tick_lower, request.tick_upper, request.liquidity);
  decision.depth_after = detail::window_depth(hypothetical, reference, thresholds.depth_window);

  const auto hypothetical_mags = per_swap_magnitudes(state.swaps(), hypothetical, nullptr, state.math());
  const auto& baseline_mags = state.baseline_magnitudes();
  std::vector<Decimal> common_baseline;
  std::vector<Decimal> common_hypothetical;
  for (std::size_t i = 0; i < hypothetical_mags.size(); ++i) {
    if (baseline_mags[i] && hypothetical_mags[i]) {
      common_baseline.push_back(*baseline_mags[i]);
      common_hypothetical.push_back(*hypothetical_mags[i]);
    }
  }
  if (common_baseline.empty()) {
    decision.degradation_infinite = true;
    decision.verdict = Verdict::Deny;
    decision.reason = "burn would exhaust pool capacity";
    return decision;
  }
  const Decimal n(common_baseline.size());
  const Decimal pi_baseline = pairwise_sum(common_baseline) / n;
  const Decimal pi_hypothetical = pairwise_sum(common_hypothetical) / n;
  decision.projected_degradation = pi_baseline > 0 ? (pi_hypothetical - pi_baseline) / pi_baseline : Decimal(0);

  if (decision.projected_degradation <= thresholds.allow_threshold) {
    if (decision.depth_after >= thresholds.min_depth) {
      decision.verdict = Verdict::Allow;
      decision.reason = "within stability thresholds";
    } else {
      decision.verdict = Verdict::Deny;
      decision.reason = "post-burn depth below minimum";
    }
  } else if (decision.projected_degradation <= thresholds.deny_threshold) {
    decision.verdict = Verdict::Suspend;
    decision.reason = "projected degradation in review band";
  } else {
    decision.verdict = Verdict::Deny;
    decision.reason = "projected degradation above deny threshold";
  }
  return decision;
}

inline nlohmann::ordered_json decision_to_json(const GateDecision& d) {
  nlohmann::ordered_json j;
  j["verdict"] = verdict_name(d.verdict);
  j["projected_degradation"] =
      d.degradation_infinite ? std::string("inf") : format_decimal(d.projected_degradation);
  j["degradation_infinite"] = d.degradation_infinite;
  j["depth_before"] = d.depth_before.str();
  j["depth_after"] = d.depth_after.str();
  j["reason"] = d.reason;
  return j;
}

inline BurnRequest burn_request_from_json(const nlohmann::json& j) {
  BurnRequest r;
  r.owner = canonical_address(j.at("owner").get<std::string>());
  r.tick_lower = detail::parse_tick(j.at("tick_lower"), "tick_lower");
  r.tick_upper = detail::parse_tick(j.at("tick_upper"), "tick_upper");
  r.liquidity = detail::parse_u128(j.at("liquidity"), "liquidity");
  if (j.contains("request_id")) r.request_id = j.at("request_id").get<std::string>();
  if (j.contains("volatility") && !j.at("volatility").is_null())
    r.volatility = Decimal(j.at("volatility").get<std::string>());
  return r;
}

/// HTTP face of the gate. Evaluations run against an immutable state
/// snapshot; thresholds can be swapped at runtime without a restart.
///
///   POST /v1/evaluate-burn   BurnRequest JSON -> GateDecision JSON
///   GET  /v1/health          dataset hash, baseline PI, swap count
///   GET  /v1/rankings?limit=N latest analysis rows, if a report was loaded
///   POST /v1/thresholds      replace thresholds at runtime
class GateService {
 public:
  GateService(GateState state, GateThresholds thresholds, std::vector<LsisReport> rankings = {})
      : state_(std::make_shared<const GateState>(std::move(state))),
        thresholds_(std::move(thresholds)),
        rankings_(std::move(rankings)) {
    thresholds_.validate();
    register_routes();
  }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  void stop() { server_.stop(); }
  httplib::Server& server() { return server_; }

  GateThresholds thresholds() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return thresholds_;
  }

  void update_thresholds(GateThresholds t) {
    t.validate();
    std::lock_guard<std::mutex> lock(mutex_);
    thresholds_ = std::move(t);
  }

 private:
  static void write_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    nlohmann::ordered_json j;
    j["code"] = code;
    j["message"] = message;
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  void register_routes() {
    server_.Post("/v1/evaluate-burn", [this](const httplib::Request& req, httplib::Response& res) {
      BurnRequest request;
      try {
        request = burn_request_from_json(nlohmann::json::parse(req.body));
      } catch (const std::exception& ex) {
        write_error(res, 400, "bad_request", ex.what());
        return;
      }
      try {
        const GateDecision decision = evaluate_burn(request, *state_, thresholds());
        res.set_content(decision_to_json(decision).dump(), "application/json");
      } catch (const ValidationError& ex) {
        write_error(res, 400, "bad_request", ex.what());
      } catch (const std::exception& ex) {
        write_error(res, 500, "internal_error", ex.what());
      }
    });

    server_.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::ordered_json j;
      j["dataset_hash"] = state_->dataset().fingerprint();
      j["baseline_pi"] = format_decimal(state_->baseline_pi());
      j["swap_count"] = state_->swaps().size();
      res.set_content(j.dump(), "application/json");
    });

    server_.Get("/v1/rankings", [this](const httplib::Request& req, httplib::Response& res) {
      if (rankings_.empty()) {
        write_error(res, 404, "no_rankings", "no analysis report loaded");
        return;
      }
      std::size_t limit = rankings_.size();
      if (req.has_param("limit")) {
        try {
          limit = std::stoull(req.get_param_value("limit"));
        } catch (const std::exception&) {
          write_error(res, 400, "bad_request", "limit must be a non-negative integer");
          return;
        }
      }
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < rankings_.size() && i < limit; ++i) rows.push_back(report_to_json(rankings_[i]));
      res.set_content(rows.dump(), "application/json");
    });

    server_.Post("/v1/thresholds", [this](const httplib::Request& req, httplib::Response& res) {
      GateThresholds next = thresholds();
      try {
        const auto j = nlohmann::json::parse(req.body);
        if (j.contains("allow_threshold")) next.allow_threshold = Decimal(j.at("allow_threshold").get<std::string>());
        if (j.contains("deny_threshold")) next.deny_threshold = Decimal(j.at("deny_threshold").get<std::string>());
        if (j.contains("min_depth")) next.min_depth = BigInt(j.at("min_depth").get<std::string>());
        if (j.contains("depth_window")) next.depth_window = j.at("depth_window").get<std::int32_t>();
        if (j.contains("reference_tick")) {
          if (j.at("reference_tick").is_null())
            next.reference_tick.reset();
          else
            next.reference_tick = j.at("reference_tick").get<std::int32_t>();
        }
        update_thresholds(next);
      } catch (const std::exception& ex) {
        write_error(res, 400, "bad_request", ex.what());
        return;
      }
      nlohmann::ordered_json j;
      j["allow_threshold"] = format_decimal(next.allow_threshold);
      j["deny_threshold"] = format_decimal(next.deny_threshold);
      j["min_depth"] = next.min_depth.str();
      j["depth_window"] = next.depth_window;
      if (next.reference_tick) j["reference_tick"] = *next.reference_tick;
      res.set_content(j.dump(), "application/json");
    });
  }

  httplib::Server server_;
  std::shared_ptr<const GateState> state_;
  mutable std::mutex mutex_;
  GateThresholds thresholds_;
  std::vector<LsisReport> rankings_;
};

}  // namespace poolscope
