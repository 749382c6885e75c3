#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldpm/aggregate.hpp"
#include "ldpm/core.hpp"

namespace ldpm {

struct EmConfig {
  double omega = 1e-5;              // stop when max cell change drops below
  uint64_t max_iterations = 100000;
};

struct EmResult {
  std::vector<double> estimate;        // simplex over the 2^k target cells
  uint64_t iterations = 0;
  bool converged = false;
  bool degenerate = false;             // stopped at iteration <= 1
  std::vector<double> log_likelihood;  // observed-data value, one per iteration
};

// Expectation-maximization decode of per-bit randomized-response reports.
// counts[y] is how many reports equal the k-bit word y; p_bit is the per-bit
// keep probability.  Starts from the uniform table; multiplicative updates
// keep the iterate on the simplex and the log-likelihood non-decreasing.
EmResult em_decode(std::span<const uint64_t> counts, double p_bit,
                   const EmConfig& config = {});

// Restrict a bit-sampling tally to the attributes of one marginal (the bits
// are flipped independently, so the restriction is itself a per-bit RR over
// k bits) and decode it.
EmResult em_decode_marginal(const Accumulator& acc, const PrivacyParams& params,
                            const MarginalSpec& spec,
                            const EmConfig& config = {});

}  // namespace ldpm
