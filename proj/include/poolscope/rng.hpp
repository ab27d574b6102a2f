#pragma once

#include <cstdint>

#include "poolscope/numeric.hpp"

namespace poolscope {

/// SplitMix64 with the standard finalizer constants. This is the generator
/// every seeded draw in the library goes through, so a swap set produced here
/// can be reproduced by any other implementation of the same scheme:
///
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
///   z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31
///
/// Wide draws (see uniform_u128_inclusive) consume two outputs: the first call
/// supplies the high 64 bits, the second the low 64 bits, and the 128-bit value
/// is reduced onto [lo, hi] by modulo. The modulo bias over a 128-bit draw is
/// negligible and keeping the reduction rule this simple is what makes the
/// stream portable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [lo, hi], both inclusive. Requires lo <= hi.
  U128 uniform_u128_inclusive(const U128& lo, const U128& hi) {
    const U128 width = hi - lo + 1;
    const std::uint64_t high = next();
    const std::uint64_t low = next();
    const U128 r = (U128(high) << 64) | U128(low);
    return lo + (r % width);
  }

 private:
  std::uint64_t state_;
};

}  // namespace poolscope
