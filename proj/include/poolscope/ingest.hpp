#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "poolscope/events.hpp"
#include "poolscope/numeric.hpp"

namespace poolscope {

// keccak256 signatures of the two pool events we index.
inline constexpr const char* kMintTopic = "0x7a53080ba414158be7ec69b987b5fb7d07dee101fe85488f0853ae16239d0bde";
inline constexpr const char* kBurnTopic = "0x0c396cd989a39f4459b5fa1aed6a9a8dcdbc45908acfd67e028cd568da98982c";

struct LogQuery {
  std::string address;
  std::string topic0;
  std::uint64_t from_block = 0;
  std::uint64_t to_block = 0;
};

/// Raised by fetch implementations on connectivity problems; fetch_and_preprocess
/// retries these a bounded number of times before giving up.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Minimal node-facing surface: filtered log queries and transaction lookup.
/// Responses mirror the standard RPC result shapes (logs carry `topics`,
/// `data`, hex-quantity `blockNumber`/`logIndex`, `transactionHash`;
/// transactions carry `from`). The concrete transport is up to the caller.
class RemoteEventSource {
 public:
  virtual ~RemoteEventSource() = default;
  virtual nlohmann::json get_logs(const LogQuery& query) = 0;
  virtual nlohmann::json get_transaction_by_hash(const std::string& tx_hash) = 0;
};

struct FetchOptions {
  int max_retries = 3;          // attempts per query before surfacing TransportError
  std::uint64_t chunk_blocks = 0;  // 0 = one query per event type over the whole range
};

namespace detail {

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw ValidationError("bad hex digit");
}

inline std::uint64_t parse_hex_quantity(const nlohmann::json& v, const char* field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (!v.is_string()) throw ValidationError(std::string("expected hex quantity in ") + field);
  const std::string& s = v.get_ref<const std::string&>();
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
    throw ValidationError(std::string("bad hex quantity in ") + field);
  std::uint64_t out = 0;
  for (std::size_t i = 2; i < s.size(); ++i) {
    if (out >> 60) throw ValidationError(std::string("hex quantity overflow in ") + field);
    out = (out << 4) | std::uint64_t(hex_nibble(s[i]));
  }
  return out;
}

inline BigInt parse_hex_word(std::string_view word) {
  BigInt out = 0;
  for (char c : word) out = (out << 4) | hex_nibble(c);
  return out;
}

/// 32-byte ABI words from the log `data` blob, left to right.
inline std::vector<BigInt> split_data_words(const std::string& data) {
  if (data.size() < 2 || data[0] != '0' || data[1] != 'x' || (data.size() - 2) % 64 != 0)
    throw ValidationError("malformed log data blob");
  std::vector<BigInt> words;
  for (std::size_t off = 2; off < data.size(); off += 64)
    words.push_back(parse_hex_word(std::string_view(data).substr(off, 64)));
  return words;
}

inline std::string address_from_word(const BigInt& word) {
  static const char* digits = "0123456789abcdef";
  U256 v = word.convert_to<U256>();
  std::string out(42, '0');
  out[1] = 'x';
  for (int i = 41; i >= 2; --i) {
    out[i] = digits[(v & 0xf).convert_to<unsigned>()];
    v >>= 4;
  }
  return out;
}

inline std::int32_t tick_from_word(const BigInt& word) {
  BigInt v = word;
  if (v >= (BigInt(1) << 255)) v -= BigInt(1) << 256;  // two's complement int24, sign-extended
  if (v < kMinTick || v > kMaxTick) throw ValidationError("decoded tick outside global bounds");
  return v.convert_to<std::int32_t>();
}

inline U128 u128_from_word(const BigInt& word) {
  if (word > (BigInt(1) << 128) - 1) throw ValidationError("decoded liquidity exceeds uint128");
  return word.convert_to<U128>();
}

}  // namespace detail

/// Decodes one raw log object into a PoolEvent. Mints carry the owner and tick
/// bounds as indexed topics and (sender, amount, amount0, amount1) in data;
/// burns carry the position address and tick bounds as topics and
/// (amount, amount0, amount1) in data.
inline PoolEvent decode_pool_log(const nlohmann::json& log, EventType type) {
  const auto& topics = log.at("topics");
  if (!topics.is_array() || topics.size() != 4) throw ValidationError("expected 4 topics on pool event log");
  const std::string topic0 = topics[0].get<std::string>();
  const char* expected = type == EventType::Mint ? kMintTopic : kBurnTopic;
  if (canonical_tx_hash(topic0) != expected) throw ValidationError("log topic0 does not match event type");

  auto topic_word = [&](int i) { return detail::parse_hex_word(std::string_view(topics[i].get_ref<const std::string&>()).substr(2)); };
  const auto words = detail::split_data_words(log.at("data").get<std::string>());

  PoolEvent e;
  e.type = type;
  e.tick_lower = detail::tick_from_word(topic_word(2));
  e.tick_upper = detail::tick_from_word(topic_word(3));
  if (e.tick_lower >= e.tick_upper) throw ValidationError("decoded tick_lower >= tick_upper");
  if (type == EventType::Mint) {
    if (words.size() != 4) throw ValidationError("mint log data must hold 4 words");
    e.owner = detail::address_from_word(topic_word(1));
    e.sender = detail::address_from_word(words[0]);
    e.liquidity = detail::u128_from_word(words[1]);
    e.amount0 = words[2].convert_to<U256>();
    e.amount1 = words[3].convert_to<U256>();
  } else {
    if (words.size() != 3) throw ValidationError("burn log data must hold 3 words");
    // The log's address field names the position; attribution is fixed up from
    // the transaction sender during enrichment.
    e.sender = detail::address_from_word(topic_word(1));
    e.owner = e.sender;
    e.liquidity = detail::u128_from_word(words[0]);
    e.amount0 = words[1].convert_to<U256>();
    e.amount1 = words[2].convert_to<U256>();
  }
  e.block_number = detail::parse_hex_quantity(log.at("blockNumber"), "blockNumber");
  e.log_index = static_cast<std::uint32_t>(detail::parse_hex_quantity(log.at("logIndex"), "logIndex"));
  e.tx_hash = canonical_tx_hash(log.at("transactionHash").get<std::string>());
  return e;
}

namespace detail {

template <typename Fn>
auto with_retries(int max_retries, Fn&& fn) {
  int attempt = 0;
  for (;;) {
    try {
      return fn();
    } catch (const TransportError& ex) {
      if (++attempt >= max_retries)
        throw RuntimeError("remote source failed after " + std::to_string(attempt) + " attempts: " + ex.what());
    }
  }
}

}  // namespace detail

/// Fetches Mint and Burn logs over [start_block, end_block], enriches each
/// event with its transaction sender, reattributes burns to that sender, and
/// returns the merged dataset sorted by (block_number, log_index).
/// Zero-liquidity events are dropped.
inline EventDataset fetch_and_preprocess(RemoteEventSource& source, const std::string& pool_address,
                                         std::uint64_t start_block, std::uint64_t end_block,
                                         const FetchOptions& options = {}, IngestStats* stats_out = nullptr) {
  if (start_block > end_block) throw ValidationError("inverted block range");
  const std::string pool = canonical_address(pool_address);

  IngestStats stats;
  std::vector<PoolEvent> events;
  const std::uint64_t chunk = options.chunk_blocks == 0 ? end_block - start_block + 1 : options.chunk_blocks;
  for (std::uint64_t from = start_block; from <= end_block;) {
    const std::uint64_t to = (end_block - from >= chunk) ? from + chunk - 1 : end_block;
    for (EventType type : {EventType::Mint, EventType::Burn}) {
      LogQuery q{pool, type == EventType::Mint ? kMintTopic : kBurnTopic, from, to};
      nlohmann::json logs = detail::with_retries(options.max_retries, [&] { return source.get_logs(q); });
      if (!logs.is_array()) throw RuntimeError("log query did not return an array");
      for (const auto& log : logs) {
        PoolEvent e = decode_pool_log(log, type);
        nlohmann::json tx = detail::with_retries(options.max_retries,
                                                 [&] { return source.get_transaction_by_hash(e.tx_hash); });
        const std::string tx_sender = canonical_address(tx.at("from").get<std::string>());
        if (type == EventType::Burn) e.owner = tx_sender;
        if (e.liquidity == 0) {
          ++stats.zero_liquidity;
          continue;
        }
        events.push_back(std::move(e));
      }
    }
    if (to == end_block) break;
    from = to + 1;
  }
  if (events.empty()) throw ValidationError("empty dataset: no events in block range");
  EventDataset d = EventDataset::build(pool, std::move(events), &stats);
  stats.accepted = d.events.size();
  if (stats_out) *stats_out = stats;
  return d;
}

}  // namespace poolscope
