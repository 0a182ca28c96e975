#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pslab {

/// Deterministic random source. All distributions are implemented by hand on
/// top of std::mt19937_64 so that a given seed reproduces the same stream
/// regardless of the standard library in use (std::*_distribution output is
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child stream keyed by (this rng's seed, stream id).
  Rng derive(std::uint64_t stream) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform01();
  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform01_pos();
  double uniform(double lo, double hi);

  /// Unbiased uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang for shape >= 1; for shape < 1 the
  /// boost Gamma(shape) = Gamma(shape + 1) * U^(1/shape) is used.
  double gamma(double shape);

  /// log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
  /// linear-domain draw would underflow to zero.
  double gamma_log(double shape);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic combination of a seed with a stream/key value.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t key);

}  // namespace pslab
