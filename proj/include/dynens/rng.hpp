#pragma once

#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <utility>

namespace dynens {

/// Finalizer of SplitMix64; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Hashes an ordered tuple of ids into a seed. Used to give every
/// (replicate, method, stage, cycle, ...) its own stream.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// SplitMix64 generator with hand-written distributions, so every draw is
/// reproducible independent of the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on (0, 1]; safe to take the log of.
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal (Box-Muller, no cached second value).
  double normal() noexcept;

  /// log of a Gamma(shape, 1) draw. Works for small shapes where the draw
  /// itself would underflow.
  double log_gamma_variate(double shape) noexcept;
  double gamma(double shape) noexcept;

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const noexcept { return Rng(derive_seed({state_, stream})); }

  std::uint64_t state() const noexcept { return state_; }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) noexcept {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = uniform_index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace dynens
