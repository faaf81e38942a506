#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hbship {

/// Derive an independent 64-bit sub-seed from a master seed, a label and an index.
///
/// The label is hashed with FNV-1a, combined with the index and the master seed
/// and passed through two rounds of the SplitMix64 finalizer. The mapping is
/// stable across platforms and releases so that partial pipeline reruns reproduce
/// the same random streams (e.g. `derive_seed(seed, "fit/chain", 2)`).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 counter-based generator.
///
/// Each stream is identified by its 64-bit key; the 128-bit counter advances by one
/// per block of four 32-bit outputs. Two generators with different keys never share
/// state, so per-ship / per-chain streams can be consumed in any thread order.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter_hi = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller (pairs are cached).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Exponential with unit rate.
  double exponential();

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Draw from N(mean, sd) truncated to [lo, hi]. Infinite bounds are allowed.
/// Inverse-CDF in the numerically safer tail, exponential rejection in extreme tails.
double truncated_normal(CounterRng& rng, double mean, double sd, double lo, double hi);

}  // namespace hbship
