#pragma once

#include <cstdint>
#include <vector>

#include "ldpm/core.hpp"
#include "ldpm/hadamard.hpp"
#include "ldpm/mechanisms.hpp"

namespace ldpm {

// Streaming tally of reports for one mechanism instance.  Every field is an
// integer count, so merging shards is exactly associative and commutative:
// a sharded pass produces bit-identical tallies to a single pass in any
// shard order.  Estimates are derived from the tallies afterwards.
struct Accumulator {
  Mechanism mechanism{};
  int d = 0;
  int k = 0;
  uint64_t total_reports = 0;

  // InpRS: 2^d per-cell counts of reported ones.
  // MargRS: C(d,k) blocks of 2^k per-cell counts.
  std::vector<uint64_t> cell_sums;

  // InpPS: 2^d reported-index counts.  MargPS: C(d,k) blocks of 2^k.
  std::vector<uint64_t> index_counts;

  // InpHT: per-coefficient sum of signs / report count, indexed by the
  // position of the coefficient in required_coefficients(d, k).
  // MargHT: C(d,k) blocks of 2^k - 1 (coefficient c at offset c - 1).
  std::vector<int64_t> signed_sums;
  std::vector<uint64_t> coeff_counts;

  // Marg*: reports seen per marginal mask (N_beta).
  std::vector<uint64_t> marginal_counts;

  // BS: 2^d histogram of reported attribute words.
  std::vector<uint64_t> joint_counts;

  // Lookup tables fixed by (mechanism, d, k).
  std::vector<uint32_t> coeff_index;     // InpHT
  std::vector<uint32_t> marginal_masks;  // Marg*

  static Accumulator make(const PrivacyParams& params);
};

void accumulate(Accumulator& acc, const Report& r);

// Elementwise sum; throws if the two tallies were configured differently.
Accumulator merge(const Accumulator& a, const Accumulator& b);
void merge_into(Accumulator& into, const Accumulator& from);

// Debiased frequency from an observed fraction.
//   RR: (F + p_r - 1) / (2 p_r - 1)
//   PS: (D F + p_s - 1) / (D p_s + p_s - 1), D = m - 1 decoys
double estimate_rr_fraction(double observed_fraction, double p_r);
double estimate_ps_fraction(double observed_fraction, double p_s,
                            uint64_t decoy_count);

// Normalized Walsh coefficient from a signed tally of n_reports +-1 signs
// over a 2^dims domain: 2^{-dims/2} (S/N) / (2 p_h - 1).  Throws if
// n_reports is zero (callers decide the zero-coverage policy).
double estimate_ht_coefficient(int64_t signed_sum, uint64_t n_reports,
                               double p_h, int dims);

struct ReconstructionInfo {
  uint64_t missing_coefficients = 0;  // HT slots nobody reported (pinned to 0)
  uint64_t empty_marginals = 0;       // Marg* blocks nobody reported (uniform)
  uint64_t averaged_from = 0;         // k-way tables behind a sub-k answer
};

// Unbiased estimate of the full joint (InpRS / InpPS only).  Cells may be
// negative; no clipping here.
Distribution reconstruct_distribution(const Accumulator& acc,
                                      const PrivacyParams& params);

// Estimated Walsh coefficients for InpHT: every required index, plus the
// pinned constant term.  Slots with no reports become 0 and are counted in
// info (when given).
HadamardCoeffs reconstruct_coefficients(const Accumulator& acc,
                                        const PrivacyParams& params,
                                        ReconstructionInfo* info = nullptr);

// One marginal estimate from any of the six view mechanisms.  Marg*
// reconstruction of a j-way marginal with j < k averages the j-way
// projections of every k-way table containing it; j > k is rejected (the
// reports only cover order-k views).  BS is not handled here (its decode is
// iterative; see the em routines).
MarginalTable reconstruct_marginal(const Accumulator& acc,
                                   const MarginalSpec& spec,
                                   const PrivacyParams& params,
                                   ReconstructionInfo* info = nullptr);

}  // namespace ldpm
