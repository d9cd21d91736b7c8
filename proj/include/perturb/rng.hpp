#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string_view>

// Fully pinned randomness stack. Every draw in the toolkit flows through
// these definitions so that a (corpus, spec, seed) triple produces the same
// bytes on any platform, compiler, or thread schedule.

namespace perturb {

// SplitMix64 (Steele/Lea/Flood). Used to derive substream seeds and to fill
// xoshiro state; noising never draws from it directly.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256** 1.0 (Blackman/Vigna), state filled from SplitMix64(seed).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform real in [0,1): 53-bit mantissa / 2^53.
  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0,k) by rejection sampling on the high bits of
  // next(). k <= 1 needs zero bits of randomness and consumes no draw.
  std::uint64_t below(std::uint64_t k) {
    if (k <= 1) return 0;
    const int bits = std::bit_width(k - 1);
    for (;;) {
      const std::uint64_t v = next() >> (64 - bits);
      if (v < k) return v;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

// Substream seed for an indexed unit of work: SplitMix64 over (seed ^ index).
// Chain calls to key a stream by several coordinates, e.g.
// derive_seed(derive_seed(seed, epoch), sentence).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(seed ^ index).next();
}

// FNV-1a over bytes; used where a stream must be keyed by a name rather than
// an index. std::hash is implementation-defined and would break portability.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace perturb
