#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ldpm/core.hpp"
#include "ldpm/rng.hpp"

namespace ldpm {

// Client-side randomizers.  Inp* privatize the full one-hot input view,
// Marg* first project onto one random k-way marginal, BS flips each
// attribute bit independently (the expectation-maximization baseline's
// transport).
enum class Mechanism : uint8_t {
  kInpRS,
  kInpPS,
  kInpHT,
  kMargRS,
  kMargPS,
  kMargHT,
  kBS,
};

inline constexpr int kMechanismCount = 7;

std::string_view mechanism_name(Mechanism m);
Mechanism mechanism_from_name(std::string_view name);
bool is_marginal_mechanism(Mechanism m);

// Everything a client or aggregator needs about one mechanism instance.
// keep_prob is the probability the truthful symbol survives randomization:
// the per-cell RR probability for *RS (budget eps/2 per cell), the
// true-index probability for *PS, the sign-keep probability for *HT, and
// the per-bit probability (budget eps/d) for BS.
struct PrivacyParams {
  Mechanism mechanism{};
  double epsilon = 0.0;
  int d = 0;
  int k = 0;
  double keep_prob = 0.0;
  uint64_t domain_size = 0;     // *PS: symbol count m (2^d or 2^k)
  uint64_t coeff_count = 0;     // InpHT: |H_k|; MargHT: 2^k - 1
  uint64_t marginal_count = 0;  // Marg*: C(d,k)

  static PrivacyParams make(Mechanism m, double epsilon, int d, int k);
};

// One privatized report.  Field use depends on the mechanism:
//   InpRS   bits (2^d one-hot cells after per-cell RR)
//   InpPS   index (reported signal index)
//   InpHT   index (coefficient mask), sign
//   MargRS  marginal_mask, bits (2^k cells)
//   MargPS  marginal_mask, index (compact cell index)
//   MargHT  marginal_mask, index (nonzero compact coefficient), sign
//   BS      bits (d attribute bits, first attribute first)
struct Report {
  Mechanism mechanism{};
  uint32_t marginal_mask = 0;
  uint32_t index = 0;
  int8_t sign = 0;
  std::vector<uint8_t> bits;

  friend bool operator==(const Report&, const Report&) = default;
};

// Throws if the payload shape does not match the mechanism tag and params.
void validate_report(const Report& r, const PrivacyParams& params);

// Randomized response on one bit: keep with probability p_r, else flip.
bool rr_bit(bool value, double p_r, SplitRng& rng);

// Preferential sampling over a domain of size m: report the truth with
// probability p_s, otherwise one of the m-1 decoys uniformly.
uint32_t ps_index(uint32_t truth, uint64_t domain_size, double p_s,
                  SplitRng& rng);

Report client_randomize(uint32_t signal, const PrivacyParams& params,
                        SplitRng& rng);

// Row-stochastic channel: probs[input * outputs + output].
struct ChannelMatrix {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> probs;

  double at(std::size_t input, std::size_t output) const {
    return probs[input * outputs + output];
  }
};

ChannelMatrix rr_channel(double p_r);

// Full analytic channel over all 2^d inputs.  Throws when the output space
// is too large to enumerate (InpRS beyond d=4).
ChannelMatrix channel_matrix(const PrivacyParams& params);

// Worst-case log-likelihood ratio over adjacent inputs; the mechanism
// satisfies eps-LDP iff this is <= eps.  Exact: enumerated channel for every
// mechanism except InpRS, whose product channel is reduced to the two
// positions where adjacent one-hot inputs differ.
double max_log_ratio(const ChannelMatrix& chan);
double verify_ldp(const PrivacyParams& params);

}  // namespace ldpm
