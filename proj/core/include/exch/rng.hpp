#pragma once

#include <cstdint>
#include <random>

namespace exch {

/// SplitMix64 finalizer. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-stream seed for (master, a, b, c). Each key is folded in through a
/// separate mix64 round:
///
///   h0 = mix64(master ^ 0x243f6a8885a308d3)
///   h1 = mix64(h0 ^ a), h2 = mix64(h1 ^ b), seed = mix64(h2 ^ c)
///
/// This function is part of the dataset and benchmark file-format contract:
/// changing it changes every generated number.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(master ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

/// Deterministic random stream. The bit sequence of std::mt19937_64 is fixed
/// by the standard; all real-valued draws are derived from it here rather than
/// through <random> distributions, whose algorithms are implementation-defined.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo == hi ? lo : lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), n > 0 (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Laplace(location, scale) by inverse CDF.
  double laplace(double location, double scale);

  /// Normal(location, scale) by inverse CDF.
  double normal(double location, double scale);

 private:
  std::mt19937_64 engine_;
};

/// Inverse CDF of Laplace(location, scale) at u in (0, 1).
double laplace_quantile(double u, double location, double scale);

/// Inverse CDF of Normal(location, scale) at u in (0, 1).
double normal_quantile(double u, double location, double scale);

double normal_cdf(double z);

/// Two-sided standard normal tail probability P(|Z| >= |z|).
double normal_two_sided_p(double z);

double laplace_cdf(double x, double location, double scale);

}  // namespace exch
