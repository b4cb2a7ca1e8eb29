#pragma once

#include <cstdint>
#include <vector>

namespace pmrf {

// SplitMix64 (Steele, Lea & Flood 2014). The entire sequence is pinned by
// this file, so seeded splits and synthetic graphs reproduce byte-for-byte
// across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n) via rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

// Fisher-Yates, draws from SplitMix64::below.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// First k elements of a shuffled copy of pool, in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k,
                                          SplitMix64& rng) {
  shuffle(pool, rng);
  if (k < pool.size()) pool.resize(k);
  return pool;
}

}  // namespace pmrf
