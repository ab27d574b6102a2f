#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "poolscope/numeric.hpp"

namespace poolscope {

enum class EventType { Mint, Burn };

inline const char* event_type_name(EventType t) { return t == EventType::Mint ? "Mint" : "Burn"; }

/// One decoded Mint/Burn log. `owner` is the attribution target: the event's
/// owner field for mints, the enriched transaction sender for burns. `sender`
/// keeps the raw address field the log itself carried.
struct PoolEvent {
  EventType type = EventType::Mint;
  std::string owner;
  std::string sender;
  std::int32_t tick_lower = 0;
  std::int32_t tick_upper = 0;
  U128 liquidity{};
  U256 amount0{};
  U256 amount1{};
  std::uint64_t block_number = 0;
  std::uint32_t log_index = 0;
  std::string tx_hash;

  friend bool operator==(const PoolEvent&, const PoolEvent&) = default;
};

struct IngestStats {
  std::size_t accepted = 0;
  std::size_t malformed = 0;        // lines failing schema validation
  std::size_t zero_liquidity = 0;   // valid lines with amount == 0, dropped
  std::size_t duplicates = 0;       // repeated (blockNumber, logIndex)

  std::size_t skipped() const { return malformed + zero_liquidity + duplicates; }
};

struct IngestOptions {
  bool strict = false;  // strict: any malformed line aborts the ingest
};

namespace detail {

inline constexpr std::uint64_t kMaxJsonSafeInteger = (1ULL << 53) - 1;

inline BigInt parse_big(const nlohmann::json& v, const char* field) {
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (s.empty() || (s[0] == '-' && s.size() == 1)) throw ValidationError(std::string("bad integer in ") + field);
    for (std::size_t i = (s[0] == '-' ? 1 : 0); i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') throw ValidationError(std::string("bad integer in ") + field);
    return BigInt(s);
  }
  if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
  if (v.is_number_integer()) return BigInt(v.get<std::int64_t>());
  throw ValidationError(std::string("expected integer or decimal string in ") + field);
}

inline U128 parse_u128(const nlohmann::json& v, const char* field) {
  BigInt b = parse_big(v, field);
  if (b < 0 || b > (BigInt(1) << 128) - 1) throw ValidationError(std::string(field) + " out of uint128 range");
  return b.convert_to<U128>();
}

inline U256 parse_u256(const nlohmann::json& v, const char* field) {
  BigInt b = parse_big(v, field);
  if (b < 0 || b > (BigInt(1) << 256) - 1) throw ValidationError(std::string(field) + " out of uint256 range");
  return b.convert_to<U256>();
}

inline std::uint64_t parse_u64(const nlohmann::json& v, const char* field) {
  BigInt b = parse_big(v, field);
  if (b < 0 || b > BigInt(std::numeric_limits<std::uint64_t>::max()))
    throw ValidationError(std::string(field) + " out of uint64 range");
  return b.convert_to<std::uint64_t>();
}

inline std::uint32_t parse_u32(const nlohmann::json& v, const char* field) {
  BigInt b = parse_big(v, field);
  if (b < 0 || b > BigInt(std::numeric_limits<std::uint32_t>::max()))
    throw ValidationError(std::string(field) + " out of uint32 range");
  return b.convert_to<std::uint32_t>();
}

inline std::int32_t parse_tick(const nlohmann::json& v, const char* field) {
  BigInt b = parse_big(v, field);
  if (b < kMinTick || b > kMaxTick) throw ValidationError(std::string(field) + " outside global tick bounds");
  return b.convert_to<std::int32_t>();
}

// Integers above 2^53-1 go out as decimal strings, smaller ones as plain numbers.
inline void append_json_integer(std::string& out, const BigInt& v) {
  if (v > BigInt(kMaxJsonSafeInteger)) {
    out += '"';
    out += v.str();
    out += '"';
  } else {
    out += v.str();
  }
}

}  // namespace detail

inline PoolEvent event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("event line is not a JSON object");
  PoolEvent e;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Mint")
    e.type = EventType::Mint;
  else if (type == "Burn")
    e.type = EventType::Burn;
  else
    throw ValidationError("unknown event type: " + type);
  e.owner = canonical_address(j.at("owner").get<std::string>());
  e.sender = canonical_address(j.at("sender").get<std::string>());
  e.tick_lower = detail::parse_tick(j.at("tickLower"), "tickLower");
  e.tick_upper = detail::parse_tick(j.at("tickUpper"), "tickUpper");
  e.liquidity = detail::parse_u128(j.at("liquidity"), "liquidity");
  e.amount0 = detail::parse_u256(j.at("amount0"), "amount0");
  e.amount1 = detail::parse_u256(j.at("amount1"), "amount1");
  e.block_number = detail::parse_u64(j.at("blockNumber"), "blockNumber");
  e.log_index = detail::parse_u32(j.at("logIndex"), "logIndex");
  e.tx_hash = canonical_tx_hash(j.at("txHash").get<std::string>());
  if (e.tick_lower >= e.tick_upper) throw ValidationError("tick_lower must be < tick_upper");
  return e;
}

/// Canonical one-line serialization. Key order is fixed; integers above
/// 2^53-1 are emitted as decimal strings. This exact byte stream feeds both
/// persistence and the dataset fingerprint, so it must stay stable.
inline std::string event_to_jsonl(const PoolEvent& e) {
  std::string out;
  out.reserve(256);
  out += "{\"type\":\"";
  out += event_type_name(e.type);
  out += "\",\"owner\":\"";
  out += e.owner;
  out += "\",\"sender\":\"";
  out += e.sender;
  out += "\",\"tickLower\":";
  out += std::to_string(e.tick_lower);
  out += ",\"tickUpper\":";
  out += std::to_string(e.tick_upper);
  out += ",\"liquidity\":";
  detail::append_json_integer(out, BigInt(e.liquidity));
  out += ",\"amount0\":";
  detail::append_json_integer(out, BigInt(e.amount0));
  out += ",\"amount1\":";
  detail::append_json_integer(out, BigInt(e.amount1));
  out += ",\"blockNumber\":";
  detail::append_json_integer(out, BigInt(e.block_number));
  out += ",\"logIndex\":";
  out += std::to_string(e.log_index);
  out += ",\"txHash\":\"";
  out += e.tx_hash;
  out += "\"}";
  return out;
}

/// Validated, globally sorted event history for one pool. Immutable once
/// built; safe to share across threads.
struct EventDataset {
  std::string pool_address;
  std::vector<PoolEvent> events;  // ascending (block_number, log_index)
  std::uint64_t min_block = 0;
  std::uint64_t max_block = 0;

  friend bool operator==(const EventDataset&, const EventDataset&) = default;

  /// Sorts, checks (block, log_index) uniqueness, computes the block range.
  /// Duplicate keys beyond the first (in input order) are dropped and counted.
  static EventDataset build(std::string pool_address, std::vector<PoolEvent> events, IngestStats* stats = nullptr) {
    if (events.empty()) throw ValidationError("empty dataset");
    std::set<std::pair<std::uint64_t, std::uint32_t>> seen;
    std::vector<PoolEvent> unique;
    unique.reserve(events.size());
    for (auto& e : events) {
      if (!seen.insert({e.block_number, e.log_index}).second) {
        if (stats) ++stats->duplicates;
        continue;
      }
      unique.push_back(std::move(e));
    }
    if (unique.empty()) throw ValidationError("empty dataset");
    std::sort(unique.begin(), unique.end(), [](const PoolEvent& a, const PoolEvent& b) {
      return std::tie(a.block_number, a.log_index) < std::tie(b.block_number, b.log_index);
    });
    EventDataset d;
    d.pool_address = canonical_address(pool_address);
    d.min_block = unique.front().block_number;
    d.max_block = unique.back().block_number;
    d.events = std::move(unique);
    return d;
  }

  std::uint64_t block_range() const { return max_block - min_block; }

  /// FNV-1a over the pool address plus every canonical event line.
  std::string fingerprint() const {
    std::uint64_t h = fnv1a64(pool_address);
    h = fnv1a64("\n", h);
    for (const auto& e : events) {
      h = fnv1a64(event_to_jsonl(e), h);
      h = fnv1a64("\n", h);
    }
    return hash_to_hex(h);
  }
};

/// Reads a JSONL event file. Lenient mode counts and skips malformed lines;
/// strict mode throws on the first one. Zero-liquidity events are dropped in
/// both modes (they contribute nothing downstream).
inline EventDataset ingest_jsonl(const std::string& path, const std::string& pool_address,
                                 const IngestOptions& options = {}, IngestStats* stats_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open event file: " + path);
  IngestStats stats;
  std::vector<PoolEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PoolEvent e;
    try {
      e = event_from_json(nlohmann::json::parse(line));
    } catch (const std::exception& ex) {
      if (options.strict)
        throw ValidationError("line " + std::to_string(line_no) + ": " + ex.what());
      ++stats.malformed;
      continue;
    }
    if (e.liquidity == 0) {
      ++stats.zero_liquidity;
      continue;
    }
    events.push_back(std::move(e));
  }
  if (events.empty()) throw ValidationError("empty dataset: " + path);
  EventDataset d = EventDataset::build(pool_address, std::move(events), &stats);
  stats.accepted = d.events.size();
  if (stats_out) *stats_out = stats;
  return d;
}

}  // namespace poolscope
