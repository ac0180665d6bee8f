#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace seqregret {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Key for stream `index` of a generator keyed by `seed`. Streams are
// addressed by value, so episode i always sees the same numbers no matter
// which worker runs it or in what order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc908ULL) + mix64(index + 0x3c6ef372fe94f82bULL));
}

// Counter-based generator: the i-th output is a pure function of (key, i).
// Satisfies UniformRandomBitGenerator, but the helpers below are what the
// library uses so that draws do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_));
  }

  // Independent child generator.
  Rng split(std::uint64_t index) const noexcept { return Rng(derive_seed(key_, index)); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe as a log argument.
  double uniform_open_low() noexcept { return 1.0 - uniform(); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Standard exponential variate.
  double exponential() noexcept { return -std::log(uniform_open_low()); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace seqregret
