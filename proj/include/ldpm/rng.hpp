#pragma once

#include <cstdint>
#include <stdexcept>

namespace ldpm {

// Counter-splittable generator built on the SplitMix64 finalizer.  Streams
// derived for distinct user indices from one experiment seed are independent
// for our purposes and, crucially, platform-deterministic: every draw below
// is integer arithmetic plus one exact float scale, so simulations shard
// across threads without any shared stream.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : state_(seed) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Stream for one user (or task) under a fixed experiment seed.
  static SplitRng for_user(uint64_t seed, uint64_t index) {
    return SplitRng(mix(seed ^ mix(index)));
  }

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Unbiased uniform draw from [0,n) (Lemire multiply-shift with rejection).
  uint32_t below(uint32_t n) {
    if (n == 0) throw std::invalid_argument("below: empty range");
    uint32_t x = static_cast<uint32_t>(next() >> 32);
    uint64_t m = static_cast<uint64_t>(x) * n;
    auto l = static_cast<uint32_t>(m);
    if (l < n) {
      uint32_t t = (0u - n) % n;
      while (l < t) {
        x = static_cast<uint32_t>(next() >> 32);
        m = static_cast<uint64_t>(x) * n;
        l = static_cast<uint32_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 32);
  }

  // UniformRandomBitGenerator interface so <random> adaptors work if wanted.
  using result_type = uint64_t;
  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~0ULL; }
  uint64_t operator()() { return next(); }

 private:
  uint64_t state_;
};

// Order-sensitive combine for deriving nested task seeds.
inline uint64_t derive_seed(uint64_t seed, uint64_t part) {
  return SplitRng::mix(seed ^ (SplitRng::mix(part) + 0x9e3779b97f4a7c15ULL));
}

template <typename... Rest>
uint64_t derive_seed(uint64_t seed, uint64_t part, Rest... rest) {
  return derive_seed(derive_seed(seed, part), rest...);
}

}  // namespace ldpm
