#ifndef DIRNET_RNG_HPP
#define DIRNET_RNG_HPP

#include <cstdint>
#include <random>

namespace dirnet {

// splitmix64 finalizer, used to derive independent per-stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source. Uniform variates are built from raw engine
/// bits so that streams are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Independent stream `id` derived from a base seed.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(mix_seed(seed) ^ mix_seed(id * 0x632be59bd9b4e019ULL + 1));
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the result unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dirnet

#endif  // DIRNET_RNG_HPP
