#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace rankkit {

// Seeded generator with fully-specified output (splitmix64), so seeded
// sampling produces identical bytes on every platform and standard
// library. std::shuffle / std::uniform_int_distribution do not give that
// guarantee.
class StableRng {
 public:
  explicit StableRng(std::uint64_t seed) : state_(seed) {}

  // Mixes additional seed material (cell coordinates, name hashes) so
  // streams keyed by different parts are independent.
  StableRng(std::uint64_t seed, std::initializer_list<std::uint64_t> parts)
      : state_(seed) {
    for (std::uint64_t p : parts) {
      state_ ^= p + 0x9e3779b97f4a7c15ULL;
      (void)next();
    }
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n); rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = n == 0 ? 0 : UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i)
      std::swap(values[i - 1], values[next_below(i)]);
  }

 private:
  std::uint64_t state_;
};

}  // namespace rankkit
