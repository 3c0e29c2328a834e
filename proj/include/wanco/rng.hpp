#pragma once

#include <cstdint>

namespace wanco {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used as a stateless hash.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: draw k of stream `key` is splitmix64(key ^ splitmix64(k)).
/// Any index range can be generated independently, so sharded generation
/// reproduces the sequential stream exactly.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(splitmix64(key)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Independent child stream.
  constexpr CounterRng derive(std::uint64_t tag) const noexcept {
    return CounterRng(key_ ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace wanco
