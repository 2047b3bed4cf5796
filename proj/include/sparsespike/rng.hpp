#pragma once

#include <cmath>
#include <cstdint>

namespace sparsespike {

inline constexpr std::uint64_t kRngGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer. Bijective on 64-bit words, so distinct inputs give
// distinct outputs; that is what makes derived seed streams provably
// collision-free.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for replication r of grid point g in a campaign with m replications
// per grid point. Injective in (g, r) for r < m, hence no repeats.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t g,
                                    std::size_t r, std::size_t m) noexcept {
  return mix64(base_seed + 1 +
               static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(m) +
               static_cast<std::uint64_t>(r));
}

// Counter-addressable generator: draw i of stream s is mix64(s + (i+1)*golden)
// (the splitmix64 sequence), so a stream can be replayed or resumed from any
// point and two objects with the same seed produce identical draws regardless
// of execution order elsewhere.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept { return mix64(seed_ + (++counter_) * kRngGolden); }

  // uniform on the open interval (0, 1)
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal, Marsaglia polar method
  double next_gaussian() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sparsespike
