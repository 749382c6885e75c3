#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ldpm {

// Attribute values are packed into an unsigned index with the FIRST attribute
// in the MOST significant bit.  attribute_bit(d, 0) is therefore the high bit.
inline uint32_t attribute_bit(int d, int attribute) {
  return 1u << (d - 1 - attribute);
}

inline int popcount(uint32_t x) { return std::popcount(x); }

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
  if (!is_pow2(n)) throw std::invalid_argument("length must be a power of two");
  return std::countr_zero(n);
}

// Software PEXT: gather the bits of `value` at the set positions of `mask`,
// packed toward bit 0 with relative order preserved.
inline uint32_t compact_bits(uint32_t value, uint32_t mask) {
  uint32_t out = 0;
  int shift = 0;
  while (mask != 0) {
    uint32_t low = mask & (0u - mask);
    if (value & low) out |= (1u << shift);
    ++shift;
    mask &= mask - 1;
  }
  return out;
}

// Software PDEP: scatter the low bits of `value` to the set positions of
// `mask`.  Inverse of compact_bits on the masked subspace; order preserving,
// hence monotone in `value` for a fixed mask.
inline uint32_t expand_bits(uint32_t value, uint32_t mask) {
  uint32_t out = 0;
  int shift = 0;
  while (mask != 0) {
    uint32_t low = mask & (0u - mask);
    if (value & (1u << shift)) out |= low;
    ++shift;
    mask &= mask - 1;
  }
  return out;
}

inline uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
  }
  return r;
}

// All d-bit masks with exactly k set bits, ascending numeric order.
std::vector<uint32_t> kway_masks(int d, int k);

}  // namespace ldpm
