#pragma once

#include <cstdint>
#include <vector>

namespace lgd {

// splitmix64: the 64-bit mixer from Steele et al., used for every seeded
// shuffle in this project so that assignments are reproducible across
// implementations from the documented recurrence alone.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1): top 53 bits of next().
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

// In-place Fisher-Yates: for i = n-1 down to 1, j = next() % (i+1), swap.
template <typename T>
void fisher_yates(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace lgd
