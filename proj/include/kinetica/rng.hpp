#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace kinetica {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
///
/// The output block for counter c under key k is a pure function of (c, k),
/// so any number of independent streams can be addressed without shared
/// state. Satisfies UniformRandomBitGenerator.
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64() : Philox4x64(0, 0) {}
  Philox4x64(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}
  Philox4x64(Key key, Block counter) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      increment();
      buffer_ = generate(counter_, key_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  static Block generate(Block ctr, Key key) {
    __extension__ using u128 = unsigned __int128;
    constexpr std::uint64_t m0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t m1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t w0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t w1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += w0;
        key[1] += w1;
      }
      const u128 p0 = static_cast<u128>(m0) * ctr[0];
      const u128 p1 = static_cast<u128>(m1) * ctr[2];
      const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const auto lo0 = static_cast<std::uint64_t>(p0);
      const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const auto lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  void increment() {
    for (auto& word : counter_)
      if (++word != 0) break;
  }

  Key key_;
  Block counter_{};
  Block buffer_{};
  int pos_ = 4;
};

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of replica `index` under `master`; distinct for distinct indices.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Stream identifiers used to keep independent draws of one replica apart.
namespace stream {
inline constexpr std::uint64_t dynamics = 0;
inline constexpr std::uint64_t initial_state = 1;
}  // namespace stream

}  // namespace kinetica
