#pragma once

#include <cstdint>
#include <random>

namespace mrf {

// splitmix64, used to derive per-trial / per-component seeds from a master
// seed. Stream k of master seed s is splitmix64 state (s + k*GOLDEN).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + stream * 0x9e3779b97f4a7c15ULL);
}

// Seedable RNG with a pinned, portable output sequence: std::mt19937_64 is
// fully specified by the standard, and the mappings below avoid the
// implementation-defined <random> distributions so that sample files are
// reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound) via rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mrf
