#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldpm/core.hpp"

namespace ldpm {

// In-place unnormalized Walsh-Hadamard transform: v'[i] = sum_j
// (-1)^{popcount(i&j)} v[j].  Length must be a power of two.  Applying it
// twice multiplies by the length.  Serial reference and an OpenMP variant
// that performs the same butterflies (bit-identical output).
void fwht_serial(std::span<double> v);
void fwht_parallel(std::span<double> v);

// Normalized transform (2^{-d/2} scaling); its own inverse.
std::vector<double> hadamard_transform(std::vector<double> v);

// Walsh coefficients of a distribution, normalized convention, restricted to
// indices of weight <= k (including index 0).
HadamardCoeffs low_order_coefficients(const Distribution& t, int k);

// Coefficient indices a mechanism must cover so that every k-way marginal is
// reconstructible: all nonzero masks of weight <= k, ascending.  Size
// sum_{l=1..k} C(d,l).
std::vector<uint32_t> required_coefficients(int d, int k);

// Closed-form reconstruction of one marginal from coefficients: the inverse
// transform restricted to indices inside beta, i.e. a size-2^k unnormalized
// transform of the compacted coefficient table scaled by 2^{d/2-k}.  Throws
// if a required coefficient (any index inside beta, including 0) is missing.
MarginalTable marginal_from_coefficients(const HadamardCoeffs& coeffs,
                                         const MarginalSpec& spec);

}  // namespace ldpm
