#include "ldpm/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ldpm/hadamard.hpp"

namespace ldpm {

namespace {

constexpr std::string_view kNames[kMechanismCount] = {
    "InpRS", "InpPS", "InpHT", "MargRS", "MargPS", "MargHT", "BS"};

// Largest output space channel_matrix will enumerate.
constexpr std::size_t kMaxChannelOutputs = std::size_t{1} << 22;

double rr_keep_prob(double budget) {
  const double e = std::exp(budget);
  return e / (1.0 + e);
}

double ps_keep_prob(double epsilon, uint64_t m) {
  // e^eps / (e^eps + m - 1), computed as 1 / (1 + (m-1) e^-eps) for range.
  return 1.0 / (1.0 + static_cast<double>(m - 1) * std::exp(-epsilon));
}

}  // namespace

std::string_view mechanism_name(Mechanism m) {
  return kNames[static_cast<std::size_t>(m)];
}

Mechanism mechanism_from_name(std::string_view name) {
  for (int i = 0; i < kMechanismCount; ++i) {
    if (kNames[i] == name) return static_cast<Mechanism>(i);
  }
  throw std::invalid_argument("unknown mechanism: " + std::string(name));
}

bool is_marginal_mechanism(Mechanism m) {
  return m == Mechanism::kMargRS || m == Mechanism::kMargPS ||
         m == Mechanism::kMargHT;
}

PrivacyParams PrivacyParams::make(Mechanism m, double epsilon, int d, int k) {
  validate_dimension(d);
  if (k < 1 || k > d) throw std::invalid_argument("order must be in [1, d]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("privacy budget must be positive and finite");
  }
  PrivacyParams p;
  p.mechanism = m;
  p.epsilon = epsilon;
  p.d = d;
  p.k = k;
  switch (m) {
    case Mechanism::kInpRS:
      // Report is one bit per one-hot cell; cap the dimension so a single
      // report stays under 64KiB.
      if (d > 16) {
        throw std::invalid_argument(
            "input-level randomized response limited to d <= 16");
      }
      p.keep_prob = rr_keep_prob(epsilon / 2.0);
      break;
    case Mechanism::kInpPS:
      p.domain_size = std::size_t{1} << d;
      p.keep_prob = ps_keep_prob(epsilon, p.domain_size);
      break;
    case Mechanism::kInpHT: {
      uint64_t total = 0;
      for (int l = 1; l <= k; ++l) total += binomial(d, l);
      p.coeff_count = total;
      p.keep_prob = rr_keep_prob(epsilon);
      break;
    }
    case Mechanism::kMargRS:
      p.marginal_count = binomial(d, k);
      p.keep_prob = rr_keep_prob(epsilon / 2.0);
      break;
    case Mechanism::kMargPS:
      p.marginal_count = binomial(d, k);
      p.domain_size = std::size_t{1} << k;
      p.keep_prob = ps_keep_prob(epsilon, p.domain_size);
      break;
    case Mechanism::kMargHT:
      p.marginal_count = binomial(d, k);
      p.coeff_count = (std::size_t{1} << k) - 1;
      p.keep_prob = rr_keep_prob(epsilon);
      break;
    case Mechanism::kBS:
      p.keep_prob = rr_keep_prob(epsilon / d);
      break;
  }
  return p;
}

void validate_report(const Report& r, const PrivacyParams& params) {
  if (r.mechanism != params.mechanism) {
    throw std::invalid_argument("report tag does not match mechanism");
  }
  const std::size_t full = std::size_t{1} << params.d;
  const std::size_t cells = std::size_t{1} << params.k;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("malformed report: ") + what);
  };
  const bool has_marginal = is_marginal_mechanism(r.mechanism);
  if (has_marginal) {
    require(popcount(r.marginal_mask) == params.k &&
                (r.marginal_mask >> params.d) == 0,
            "marginal mask");
  } else {
    require(r.marginal_mask == 0, "unexpected marginal mask");
  }
  switch (r.mechanism) {
    case Mechanism::kInpRS:
      require(r.bits.size() == full && r.index == 0 && r.sign == 0, "payload");
      break;
    case Mechanism::kInpPS:
      require(r.bits.empty() && r.index < full && r.sign == 0, "payload");
      break;
    case Mechanism::kInpHT: {
      const int w = popcount(r.index);
      require(r.bits.empty() && r.index != 0 && (r.index >> params.d) == 0 &&
                  w <= params.k && (r.sign == 1 || r.sign == -1),
              "payload");
      break;
    }
    case Mechanism::kMargRS:
      require(r.bits.size() == cells && r.index == 0 && r.sign == 0, "payload");
      break;
    case Mechanism::kMargPS:
      require(r.bits.empty() && r.index < cells && r.sign == 0, "payload");
      break;
    case Mechanism::kMargHT:
      require(r.bits.empty() && r.index >= 1 && r.index < cells &&
                  (r.sign == 1 || r.sign == -1),
              "payload");
      break;
    case Mechanism::kBS:
      require(r.bits.size() == static_cast<std::size_t>(params.d) &&
                  r.index == 0 && r.sign == 0,
              "payload");
      break;
  }
  for (uint8_t b : r.bits) {
    require(b <= 1, "bit value");
  }
}

bool rr_bit(bool value, double p_r, SplitRng& rng) {
  if (!(p_r > 0.5) || !(p_r <= 1.0)) {
    throw std::invalid_argument("response-keeping probability out of (1/2, 1]");
  }
  return rng.bernoulli(p_r) ? value : !value;
}

uint32_t ps_index(uint32_t truth, uint64_t domain_size, double p_s,
                  SplitRng& rng) {
  if (domain_size < 2) throw std::invalid_argument("domain must have >= 2 symbols");
  if (truth >= domain_size) throw std::invalid_argument("symbol out of domain");
  if (!(p_s > 1.0 / static_cast<double>(domain_size)) || !(p_s <= 1.0)) {
    throw std::invalid_argument("sampling probability out of (1/m, 1]");
  }
  if (rng.bernoulli(p_s)) return truth;
  const auto decoy = rng.below(static_cast<uint32_t>(domain_size - 1));
  return decoy >= truth ? decoy + 1 : decoy;
}

namespace {

Report randomize_inp_rs(uint32_t signal, const PrivacyParams& p, SplitRng& rng) {
  Report r;
  r.mechanism = Mechanism::kInpRS;
  const std::size_t m = std::size_t{1} << p.d;
  r.bits.resize(m);
  for (std::size_t cell = 0; cell < m; ++cell) {
    const bool truth = (cell == signal);
    r.bits[cell] = rng.bernoulli(p.keep_prob) ? truth : !truth;
  }
  return r;
}

Report randomize_inp_ps(uint32_t signal, const PrivacyParams& p, SplitRng& rng) {
  Report r;
  r.mechanism = Mechanism::kInpPS;
  r.index = ps_index(signal, p.domain_size, p.keep_prob, rng);
  return r;
}

Report randomize_inp_ht(uint32_t signal, const PrivacyParams& p, SplitRng& rng,
                        const std::vector<uint32_t>& coeffs) {
  Report r;
  r.mechanism = Mechanism::kInpHT;
  r.index = coeffs[rng.below(static_cast<uint32_t>(coeffs.size()))];
  const bool negative = (popcount(r.index & signal) & 1) != 0;
  const bool keep = rng.bernoulli(p.keep_prob);
  r.sign = (negative == keep) ? -1 : 1;
  return r;
}

Report randomize_marg_rs(uint32_t signal, const PrivacyParams& p, SplitRng& rng,
                         uint32_t beta) {
  Report r;
  r.mechanism = Mechanism::kMargRS;
  r.marginal_mask = beta;
  const uint32_t cell = compact_bits(signal, beta);
  const std::size_t m = std::size_t{1} << p.k;
  r.bits.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    const bool truth = (c == cell);
    r.bits[c] = rng.bernoulli(p.keep_prob) ? truth : !truth;
  }
  return r;
}

Report randomize_marg_ps(uint32_t signal, const PrivacyParams& p, SplitRng& rng,
                         uint32_t beta) {
  Report r;
  r.mechanism = Mechanism::kMargPS;
  r.marginal_mask = beta;
  r.index = ps_index(compact_bits(signal, beta), p.domain_size, p.keep_prob, rng);
  return r;
}

Report randomize_marg_ht(uint32_t signal, const PrivacyParams& p, SplitRng& rng,
                         uint32_t beta) {
  Report r;
  r.mechanism = Mechanism::kMargHT;
  r.marginal_mask = beta;
  // Coefficient 0 carries no information (the aggregator pins it), so draw
  // uniformly from the 2^k - 1 informative coefficients.
  r.index = 1 + rng.below(static_cast<uint32_t>(p.coeff_count));
  const uint32_t cell = compact_bits(signal, beta);
  const bool negative = (popcount(r.index & cell) & 1) != 0;
  const bool keep = rng.bernoulli(p.keep_prob);
  r.sign = (negative == keep) ? -1 : 1;
  return r;
}

Report randomize_bs(uint32_t signal, const PrivacyParams& p, SplitRng& rng) {
  Report r;
  r.mechanism = Mechanism::kBS;
  r.bits.resize(p.d);
  for (int attr = 0; attr < p.d; ++attr) {
    const bool value = (signal & attribute_bit(p.d, attr)) != 0;
    r.bits[attr] = rng.bernoulli(p.keep_prob) ? value : !value;
  }
  return r;
}

}  // namespace

Report client_randomize(uint32_t signal, const PrivacyParams& params,
                        SplitRng& rng) {
  if ((std::size_t{signal} >> params.d) != 0) {
    throw std::invalid_argument("signal out of domain");
  }
  switch (params.mechanism) {
    case Mechanism::kInpRS:
      return randomize_inp_rs(signal, params, rng);
    case Mechanism::kInpPS:
      return randomize_inp_ps(signal, params, rng);
    case Mechanism::kInpHT: {
      // Enumeration is cheap relative to a report batch; hot paths that
      // randomize many users share one list via the accumulator-side driver.
      const auto coeffs = required_coefficients(params.d, params.k);
      return randomize_inp_ht(signal, params, rng, coeffs);
    }
    case Mechanism::kMargRS:
    case Mechanism::kMargPS:
    case Mechanism::kMargHT: {
      const auto masks = kway_masks(params.d, params.k);
      const uint32_t beta = masks[rng.below(static_cast<uint32_t>(masks.size()))];
      if (params.mechanism == Mechanism::kMargRS) {
        return randomize_marg_rs(signal, params, rng, beta);
      }
      if (params.mechanism == Mechanism::kMargPS) {
        return randomize_marg_ps(signal, params, rng, beta);
      }
      return randomize_marg_ht(signal, params, rng, beta);
    }
    case Mechanism::kBS:
      return randomize_bs(signal, params, rng);
  }
  throw std::logic_error("unreachable");
}

ChannelMatrix rr_channel(double p_r) {
  if (!(p_r > 0.5) || !(p_r <= 1.0)) {
    throw std::invalid_argument("response-keeping probability out of (1/2, 1]");
  }
  ChannelMatrix c;
  c.inputs = 2;
  c.outputs = 2;
  c.probs = {p_r, 1.0 - p_r, 1.0 - p_r, p_r};
  return c;
}

ChannelMatrix channel_matrix(const PrivacyParams& params) {
  const std::size_t inputs = std::size_t{1} << params.d;
  const double p = params.keep_prob;
  ChannelMatrix chan;
  chan.inputs = inputs;

  auto allocate = [&](std::size_t outputs) {
    if (outputs > kMaxChannelOutputs ||
        inputs > kMaxChannelOutputs / outputs) {
      throw std::invalid_argument(
          "output space too large to enumerate for this mechanism");
    }
    chan.outputs = outputs;
    chan.probs.assign(inputs * outputs, 0.0);
  };

  switch (params.mechanism) {
    case Mechanism::kInpRS: {
      if (params.d > 4) {
        throw std::invalid_argument(
            "output space too large to enumerate for this mechanism");
      }
      const std::size_t cells = inputs;
      allocate(std::size_t{1} << cells);
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t o = 0; o < chan.outputs; ++o) {
          double prob = 1.0;
          for (std::size_t cell = 0; cell < cells; ++cell) {
            const bool truth = (cell == j);
            const bool reported = ((o >> cell) & 1) != 0;
            prob *= (reported == truth) ? p : 1.0 - p;
          }
          chan.probs[j * chan.outputs + o] = prob;
        }
      }
      break;
    }
    case Mechanism::kInpPS: {
      allocate(inputs);
      const double other =
          (1.0 - p) / static_cast<double>(params.domain_size - 1);
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t o = 0; o < inputs; ++o) {
          chan.probs[j * inputs + o] = (o == j) ? p : other;
        }
      }
      break;
    }
    case Mechanism::kInpHT: {
      const auto coeffs = required_coefficients(params.d, params.k);
      allocate(coeffs.size() * 2);  // output id = 2 * slot + (sign == +1)
      const double pick = 1.0 / static_cast<double>(coeffs.size());
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t s = 0; s < coeffs.size(); ++s) {
          const bool negative = (popcount(coeffs[s] & static_cast<uint32_t>(j)) & 1) != 0;
          const double keep_plus = negative ? 1.0 - p : p;
          chan.probs[j * chan.outputs + 2 * s + 1] = pick * keep_plus;
          chan.probs[j * chan.outputs + 2 * s] = pick * (1.0 - keep_plus);
        }
      }
      break;
    }
    case Mechanism::kMargRS: {
      const auto masks = kway_masks(params.d, params.k);
      const std::size_t cells = std::size_t{1} << params.k;
      const std::size_t per = std::size_t{1} << cells;
      allocate(masks.size() * per);
      const double pick = 1.0 / static_cast<double>(masks.size());
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t b = 0; b < masks.size(); ++b) {
          const uint32_t cell = compact_bits(static_cast<uint32_t>(j), masks[b]);
          for (std::size_t o = 0; o < per; ++o) {
            double prob = pick;
            for (std::size_t c = 0; c < cells; ++c) {
              const bool truth = (c == cell);
              const bool reported = ((o >> c) & 1) != 0;
              prob *= (reported == truth) ? p : 1.0 - p;
            }
            chan.probs[j * chan.outputs + b * per + o] = prob;
          }
        }
      }
      break;
    }
    case Mechanism::kMargPS: {
      const auto masks = kway_masks(params.d, params.k);
      const std::size_t cells = std::size_t{1} << params.k;
      allocate(masks.size() * cells);
      const double pick = 1.0 / static_cast<double>(masks.size());
      const double other =
          (1.0 - p) / static_cast<double>(params.domain_size - 1);
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t b = 0; b < masks.size(); ++b) {
          const uint32_t cell = compact_bits(static_cast<uint32_t>(j), masks[b]);
          for (std::size_t o = 0; o < cells; ++o) {
            chan.probs[j * chan.outputs + b * cells + o] =
                pick * ((o == cell) ? p : other);
          }
        }
      }
      break;
    }
    case Mechanism::kMargHT: {
      const auto masks = kway_masks(params.d, params.k);
      const std::size_t nz = (std::size_t{1} << params.k) - 1;
      allocate(masks.size() * nz * 2);
      const double pick =
          1.0 / static_cast<double>(masks.size() * nz);
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t b = 0; b < masks.size(); ++b) {
          const uint32_t cell = compact_bits(static_cast<uint32_t>(j), masks[b]);
          for (std::size_t c = 1; c <= nz; ++c) {
            const bool negative =
                (popcount(static_cast<uint32_t>(c) & cell) & 1) != 0;
            const double keep_plus = negative ? 1.0 - p : p;
            const std::size_t base = j * chan.outputs + (b * nz + (c - 1)) * 2;
            chan.probs[base + 1] = pick * keep_plus;
            chan.probs[base] = pick * (1.0 - keep_plus);
          }
        }
      }
      break;
    }
    case Mechanism::kBS: {
      allocate(inputs);
      for (std::size_t j = 0; j < inputs; ++j) {
        for (std::size_t o = 0; o < inputs; ++o) {
          const int flips = popcount(static_cast<uint32_t>(j ^ o));
          chan.probs[j * inputs + o] =
              std::pow(p, params.d - flips) * std::pow(1.0 - p, flips);
        }
      }
      break;
    }
  }
  return chan;
}

double max_log_ratio(const ChannelMatrix& chan) {
  double worst = 0.0;
  for (std::size_t a = 0; a < chan.inputs; ++a) {
    for (std::size_t b = a + 1; b < chan.inputs; ++b) {
      for (std::size_t o = 0; o < chan.outputs; ++o) {
        const double pa = chan.at(a, o);
        const double pb = chan.at(b, o);
        if (pa == 0.0 && pb == 0.0) continue;
        if (pa == 0.0 || pb == 0.0) {
          return std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, std::abs(std::log(pa / pb)));
      }
    }
  }
  return worst;
}

double verify_ldp(const PrivacyParams& params) {
  if (params.mechanism == Mechanism::kInpRS) {
    // The per-cell responses are independent, so the likelihood ratio of two
    // adjacent one-hot inputs cancels everywhere except the two cells where
    // they differ.  The exact worst case is therefore the max log ratio of
    // the 4-output channel restricted to those two cells (inputs "(1,0)" and
    // "(0,1)"), regardless of d.
    const double p = params.keep_prob;
    ChannelMatrix reduced;
    reduced.inputs = 2;
    reduced.outputs = 4;
    reduced.probs.resize(8);
    for (int in = 0; in < 2; ++in) {
      const bool first_hot = (in == 0);
      for (int o = 0; o < 4; ++o) {
        const bool r0 = (o & 1) != 0;
        const bool r1 = (o & 2) != 0;
        const double p0 = (r0 == first_hot) ? p : 1.0 - p;
        const double p1 = (r1 == !first_hot) ? p : 1.0 - p;
        reduced.probs[in * 4 + o] = p0 * p1;
      }
    }
    return max_log_ratio(reduced);
  }
  return max_log_ratio(channel_matrix(params));
}

}  // namespace ldpm
