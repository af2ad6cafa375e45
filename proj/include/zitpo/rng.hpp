#pragma once

#include <cstdint>
#include <limits>

namespace zitpo {

/// Counter-based 64-bit generator: output k is the SplitMix64 finalizer
/// applied to key + k * golden-gamma. Streams with different keys are
/// independent, and a stream's output depends only on (key, k).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t counter() const { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Key of the independent stream for replicate `index` under `seed`.
  static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
    return seed ^ mix(index + 0x632be59bd9b4e019ULL);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace zitpo
