#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace sdbc {

// splitmix64 step; used to whiten seeds and to derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG wrapper. All sampling is built from raw mt19937_64
/// draws with fixed arithmetic, so results are identical across platforms
/// and standard library implementations (std::uniform_* and
/// std::discrete_distribution make no such guarantee).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Independent stream derived from (seed, a, b). Mixing both indices
  /// through splitmix64 keeps streams decorrelated even for adjacent ids.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b * 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    return Rng(h);
  }

  std::uint64_t raw() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    auto v = static_cast<int>(unit() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  /// Inverse-CDF sample from an unnormalized nonnegative weight vector.
  int discrete(std::span<const double> w) {
    double total = 0.0;
    for (double v : w) total += v;
    double target = unit() * total;
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      if (w[i] <= 0.0) continue;
      last = i;
      acc += w[i];
      if (target < acc) return i;
    }
    return last;  // guard against accumulated rounding at the top end
  }

  /// Standard normal via Box-Muller (avoids std::normal_distribution, whose
  /// draw sequence is implementation-defined).
  double gaussian() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sdbc
