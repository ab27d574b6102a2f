#pragma once

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <ios>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poolscope {

// 50 significant decimal digits; all price/score math runs on this type.
using Decimal = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<50>>;
using BigInt = boost::multiprecision::cpp_int;
using U128 = boost::multiprecision::uint128_t;
using U256 = boost::multiprecision::uint256_t;

// Input/config errors (bad flags, malformed files, violated preconditions).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failures while executing an otherwise valid request (I/O, transport, math domain).
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kMinTick = -887272;
inline constexpr std::int64_t kMaxTick = 887272;

inline const BigInt& q96() {
  static const BigInt q = BigInt(1) << 96;
  return q;
}

/// Canonical decimal rendering used in every CSV/JSON we emit: up to 30
/// significant digits, trailing zeros stripped by the backend, "0" for zero.
inline std::string format_decimal(const Decimal& d) {
  return d.str(30, std::ios_base::fmtflags(0));
}

inline bool is_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

inline bool is_hex_string(std::string_view s, std::size_t nibbles) {
  if (s.size() != nibbles + 2 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return false;
  for (std::size_t i = 2; i < s.size(); ++i)
    if (!is_hex_digit(s[i])) return false;
  return true;
}

/// Lowercases a 20-byte 0x-prefixed address. Throws ValidationError on bad shape.
inline std::string canonical_address(std::string_view raw) {
  if (!is_hex_string(raw, 40)) throw ValidationError("invalid address: " + std::string(raw));
  std::string out(raw);
  for (auto& c : out)
    if (c >= 'A' && c <= 'F') c += 'a' - 'A';
  out[1] = 'x';
  return out;
}

inline std::string canonical_tx_hash(std::string_view raw) {
  if (!is_hex_string(raw, 64)) throw ValidationError("invalid tx hash: " + std::string(raw));
  std::string out(raw);
  for (auto& c : out)
    if (c >= 'A' && c <= 'F') c += 'a' - 'A';
  out[1] = 'x';
  return out;
}

// 64-bit FNV-1a; stable across platforms, used for dataset fingerprints.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_to_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(h >> shift) & 0xf]);
  return out;
}

}  // namespace poolscope
