#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace shtauc {

/// splitmix64 step; used both as a bit mixer and for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and one or more salts.
/// Children with distinct salt tuples are statistically independent, so
/// parallel trials can be seeded order-independently.
template <typename... Salts>
std::uint64_t derive_seed(std::uint64_t master, Salts... salts) {
  std::uint64_t s = splitmix64(master);
  ((s = splitmix64(s ^ static_cast<std::uint64_t>(salts))), ...);
  return s;
}

/// Deterministic random source: mt19937_64 with hand-specified integer,
/// uniform and Gaussian transforms. std::*_distribution is intentionally
/// avoided: the standard does not pin down its output, so seeds would not
/// reproduce across standard libraries. With this class a (seed, call
/// sequence) pair yields identical streams within one build; bit-identity
/// across platforms is limited only by libm (log/cos/sin) differences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased draw from {0, 1, ..., m-1} by rejection.
  std::size_t uniform_index(std::size_t m) {
    const std::uint64_t n = static_cast<std::uint64_t>(m);
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod m
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return static_cast<std::size_t>(x % n);
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so log(u1) is finite.
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  /// k distinct indices from [0, n), in selection order (not sorted).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + uniform_index(n - i)]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shtauc
