#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fedrec {

// splitmix64 step. Used both as the core generator and for seed derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG with pinned semantics: identical seeds produce identical
// streams on every platform. No std::*_distribution anywhere (their output is
// implementation-defined, which would break byte-identical reruns).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate trivially related seeds (0, 1, 2, ...).
    splitmix64_next(state_);
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed and stream tags, e.g.
// (run_seed, round, client_id). Order of tags matters.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = base;
  splitmix64_next(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  splitmix64_next(s);
  s ^= b + 0xd1b54a32d192ed03ULL;
  splitmix64_next(s);
  s ^= c + 0x8bb84b93962eacc9ULL;
  return splitmix64_next(s);
}

}  // namespace fedrec
