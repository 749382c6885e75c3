#include "ldpm/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldpm {

namespace {

std::size_t slot_of(const std::vector<uint32_t>& sorted, uint32_t value,
                    const char* what) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  if (it == sorted.end() || *it != value) {
    throw std::invalid_argument(std::string("report refers to unknown ") + what);
  }
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace

Accumulator Accumulator::make(const PrivacyParams& params) {
  Accumulator acc;
  acc.mechanism = params.mechanism;
  acc.d = params.d;
  acc.k = params.k;
  const std::size_t full = std::size_t{1} << params.d;
  const std::size_t cells = std::size_t{1} << params.k;
  switch (params.mechanism) {
    case Mechanism::kInpRS:
      acc.cell_sums.assign(full, 0);
      break;
    case Mechanism::kInpPS:
      acc.index_counts.assign(full, 0);
      break;
    case Mechanism::kInpHT:
      acc.coeff_index = required_coefficients(params.d, params.k);
      acc.signed_sums.assign(acc.coeff_index.size(), 0);
      acc.coeff_counts.assign(acc.coeff_index.size(), 0);
      break;
    case Mechanism::kMargRS:
      acc.marginal_masks = kway_masks(params.d, params.k);
      acc.marginal_counts.assign(acc.marginal_masks.size(), 0);
      acc.cell_sums.assign(acc.marginal_masks.size() * cells, 0);
      break;
    case Mechanism::kMargPS:
      acc.marginal_masks = kway_masks(params.d, params.k);
      acc.marginal_counts.assign(acc.marginal_masks.size(), 0);
      acc.index_counts.assign(acc.marginal_masks.size() * cells, 0);
      break;
    case Mechanism::kMargHT:
      acc.marginal_masks = kway_masks(params.d, params.k);
      acc.marginal_counts.assign(acc.marginal_masks.size(), 0);
      acc.signed_sums.assign(acc.marginal_masks.size() * (cells - 1), 0);
      acc.coeff_counts.assign(acc.marginal_masks.size() * (cells - 1), 0);
      break;
    case Mechanism::kBS:
      acc.joint_counts.assign(full, 0);
      break;
  }
  return acc;
}

void accumulate(Accumulator& acc, const Report& r) {
  if (r.mechanism != acc.mechanism) {
    throw std::invalid_argument("report tag does not match accumulator");
  }
  switch (acc.mechanism) {
    case Mechanism::kInpRS: {
      if (r.bits.size() != acc.cell_sums.size()) {
        throw std::invalid_argument("malformed report: payload length");
      }
      for (std::size_t i = 0; i < r.bits.size(); ++i) acc.cell_sums[i] += r.bits[i];
      break;
    }
    case Mechanism::kInpPS: {
      if (r.index >= acc.index_counts.size()) {
        throw std::invalid_argument("malformed report: index out of domain");
      }
      ++acc.index_counts[r.index];
      break;
    }
    case Mechanism::kInpHT: {
      const std::size_t slot = slot_of(acc.coeff_index, r.index, "coefficient");
      if (r.sign != 1 && r.sign != -1) {
        throw std::invalid_argument("malformed report: sign");
      }
      acc.signed_sums[slot] += r.sign;
      ++acc.coeff_counts[slot];
      break;
    }
    case Mechanism::kMargRS: {
      const std::size_t pos =
          slot_of(acc.marginal_masks, r.marginal_mask, "marginal");
      const std::size_t cells = std::size_t{1} << acc.k;
      if (r.bits.size() != cells) {
        throw std::invalid_argument("malformed report: payload length");
      }
      ++acc.marginal_counts[pos];
      for (std::size_t c = 0; c < cells; ++c) {
        acc.cell_sums[pos * cells + c] += r.bits[c];
      }
      break;
    }
    case Mechanism::kMargPS: {
      const std::size_t pos =
          slot_of(acc.marginal_masks, r.marginal_mask, "marginal");
      const std::size_t cells = std::size_t{1} << acc.k;
      if (r.index >= cells) {
        throw std::invalid_argument("malformed report: index out of domain");
      }
      ++acc.marginal_counts[pos];
      ++acc.index_counts[pos * cells + r.index];
      break;
    }
    case Mechanism::kMargHT: {
      const std::size_t pos =
          slot_of(acc.marginal_masks, r.marginal_mask, "marginal");
      const std::size_t nz = (std::size_t{1} << acc.k) - 1;
      if (r.index < 1 || r.index > nz) {
        throw std::invalid_argument("malformed report: coefficient out of range");
      }
      if (r.sign != 1 && r.sign != -1) {
        throw std::invalid_argument("malformed report: sign");
      }
      ++acc.marginal_counts[pos];
      acc.signed_sums[pos * nz + (r.index - 1)] += r.sign;
      ++acc.coeff_counts[pos * nz + (r.index - 1)];
      break;
    }
    case Mechanism::kBS: {
      if (r.bits.size() != static_cast<std::size_t>(acc.d)) {
        throw std::invalid_argument("malformed report: payload length");
      }
      uint32_t word = 0;
      for (int attr = 0; attr < acc.d; ++attr) {
        if (r.bits[attr] > 1) throw std::invalid_argument("malformed report: bit");
        if (r.bits[attr]) word |= attribute_bit(acc.d, attr);
      }
      ++acc.joint_counts[word];
      break;
    }
  }
  ++acc.total_reports;
}

namespace {

void check_same_shape(const Accumulator& a, const Accumulator& b) {
  const bool ok = a.mechanism == b.mechanism && a.d == b.d && a.k == b.k &&
                  a.cell_sums.size() == b.cell_sums.size() &&
                  a.index_counts.size() == b.index_counts.size() &&
                  a.signed_sums.size() == b.signed_sums.size() &&
                  a.coeff_counts.size() == b.coeff_counts.size() &&
                  a.marginal_counts.size() == b.marginal_counts.size() &&
                  a.joint_counts.size() == b.joint_counts.size();
  if (!ok) throw std::invalid_argument("cannot merge differently shaped tallies");
}

template <typename T>
void add_into(std::vector<T>& into, const std::vector<T>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

}  // namespace

void merge_into(Accumulator& into, const Accumulator& from) {
  check_same_shape(into, from);
  into.total_reports += from.total_reports;
  add_into(into.cell_sums, from.cell_sums);
  add_into(into.index_counts, from.index_counts);
  add_into(into.signed_sums, from.signed_sums);
  add_into(into.coeff_counts, from.coeff_counts);
  add_into(into.marginal_counts, from.marginal_counts);
  add_into(into.joint_counts, from.joint_counts);
}

Accumulator merge(const Accumulator& a, const Accumulator& b) {
  Accumulator out = a;
  merge_into(out, b);
  return out;
}

double estimate_rr_fraction(double observed_fraction, double p_r) {
  if (!(p_r > 0.5) || !(p_r <= 1.0)) {
    throw std::invalid_argument("response-keeping probability out of (1/2, 1]");
  }
  return (observed_fraction + p_r - 1.0) / (2.0 * p_r - 1.0);
}

double estimate_ps_fraction(double observed_fraction, double p_s,
                            uint64_t decoy_count) {
  if (decoy_count < 1) throw std::invalid_argument("need at least one decoy");
  const double dd = static_cast<double>(decoy_count);
  const double denom = dd * p_s + p_s - 1.0;
  if (!(denom > 0.0) || !(p_s <= 1.0)) {
    throw std::invalid_argument("sampling probability out of (1/m, 1]");
  }
  return (dd * observed_fraction + p_s - 1.0) / denom;
}

double estimate_ht_coefficient(int64_t signed_sum, uint64_t n_reports,
                               double p_h, int dims) {
  if (n_reports == 0) throw std::invalid_argument("no reports for coefficient");
  if (!(p_h > 0.5) || !(p_h <= 1.0)) {
    throw std::invalid_argument("sign-keeping probability out of (1/2, 1]");
  }
  const double mean = static_cast<double>(signed_sum) /
                      static_cast<double>(n_reports);
  return std::pow(2.0, -0.5 * dims) * mean / (2.0 * p_h - 1.0);
}

Distribution reconstruct_distribution(const Accumulator& acc,
                                      const PrivacyParams& params) {
  if (acc.total_reports == 0) throw std::runtime_error("no reports to decode");
  const double n = static_cast<double>(acc.total_reports);
  Distribution est(acc.d);
  switch (acc.mechanism) {
    case Mechanism::kInpRS:
      for (std::size_t i = 0; i < est.size(); ++i) {
        est.cells[i] = estimate_rr_fraction(
            static_cast<double>(acc.cell_sums[i]) / n, params.keep_prob);
      }
      break;
    case Mechanism::kInpPS:
      for (std::size_t i = 0; i < est.size(); ++i) {
        est.cells[i] = estimate_ps_fraction(
            static_cast<double>(acc.index_counts[i]) / n, params.keep_prob,
            params.domain_size - 1);
      }
      break;
    default:
      throw std::invalid_argument(
          "full-domain estimate only defined for the input-level RS/PS views");
  }
  return est;
}

HadamardCoeffs reconstruct_coefficients(const Accumulator& acc,
                                        const PrivacyParams& params,
                                        ReconstructionInfo* info) {
  if (acc.mechanism != Mechanism::kInpHT) {
    throw std::invalid_argument("coefficient estimates require the HT view");
  }
  HadamardCoeffs coeffs;
  coeffs.d = acc.d;
  coeffs.normalized = true;
  coeffs.entries[0] = std::pow(2.0, -0.5 * acc.d);  // always sums to one
  for (std::size_t s = 0; s < acc.coeff_index.size(); ++s) {
    if (acc.coeff_counts[s] == 0) {
      coeffs.entries[acc.coeff_index[s]] = 0.0;
      if (info != nullptr) ++info->missing_coefficients;
      continue;
    }
    coeffs.entries[acc.coeff_index[s]] = estimate_ht_coefficient(
        acc.signed_sums[s], acc.coeff_counts[s], params.keep_prob, acc.d);
  }
  return coeffs;
}

namespace {

// Direct k-way table for one collected marginal block of a Marg* tally.
MarginalTable block_estimate(const Accumulator& acc,
                             const PrivacyParams& params, std::size_t pos,
                             ReconstructionInfo* info) {
  const MarginalSpec spec(acc.d, acc.marginal_masks[pos]);
  MarginalTable out(spec);
  const std::size_t cells = spec.table_size();
  const uint64_t n_beta = acc.marginal_counts[pos];
  if (n_beta == 0) {
    if (info != nullptr) ++info->empty_marginals;
    const double mass = 1.0 / static_cast<double>(cells);
    for (auto& c : out.cells) c = mass;
    return out;
  }
  const double n = static_cast<double>(n_beta);
  switch (acc.mechanism) {
    case Mechanism::kMargRS:
      for (std::size_t c = 0; c < cells; ++c) {
        out.cells[c] = estimate_rr_fraction(
            static_cast<double>(acc.cell_sums[pos * cells + c]) / n,
            params.keep_prob);
      }
      break;
    case Mechanism::kMargPS:
      for (std::size_t c = 0; c < cells; ++c) {
        out.cells[c] = estimate_ps_fraction(
            static_cast<double>(acc.index_counts[pos * cells + c]) / n,
            params.keep_prob, params.domain_size - 1);
      }
      break;
    case Mechanism::kMargHT: {
      // Spectrum of the k-bit marginal itself; invert over the compact domain.
      HadamardCoeffs coeffs;
      coeffs.d = acc.k;
      coeffs.normalized = true;
      coeffs.entries[0] = std::pow(2.0, -0.5 * acc.k);
      const std::size_t nz = cells - 1;
      for (std::size_t c = 1; c <= nz; ++c) {
        const std::size_t slot = pos * nz + (c - 1);
        if (acc.coeff_counts[slot] == 0) {
          coeffs.entries[static_cast<uint32_t>(c)] = 0.0;
          if (info != nullptr) ++info->missing_coefficients;
          continue;
        }
        coeffs.entries[static_cast<uint32_t>(c)] = estimate_ht_coefficient(
            acc.signed_sums[slot], acc.coeff_counts[slot], params.keep_prob,
            acc.k);
      }
      const MarginalSpec compactspec(acc.k, (1u << acc.k) - 1);
      MarginalTable flat = marginal_from_coefficients(coeffs, compactspec);
      out.cells = std::move(flat.cells);
      break;
    }
    default:
      throw std::logic_error("unreachable");
  }
  return out;
}

}  // namespace

MarginalTable reconstruct_marginal(const Accumulator& acc,
                                   const MarginalSpec& spec,
                                   const PrivacyParams& params,
                                   ReconstructionInfo* info) {
  if (spec.d != acc.d) throw std::invalid_argument("dimension mismatch");
  const int j = spec.k();
  switch (acc.mechanism) {
    case Mechanism::kInpRS:
    case Mechanism::kInpPS: {
      const Distribution est = reconstruct_distribution(acc, params);
      return marginal_operator(est, spec);
    }
    case Mechanism::kInpHT: {
      if (j > acc.k) {
        throw std::invalid_argument(
            "reports only cover marginals up to the collected order");
      }
      const HadamardCoeffs coeffs = reconstruct_coefficients(acc, params, info);
      MarginalTable out = marginal_from_coefficients(coeffs, spec);
      if (info != nullptr && acc.total_reports == 0) ++info->empty_marginals;
      return out;
    }
    case Mechanism::kMargRS:
    case Mechanism::kMargPS:
    case Mechanism::kMargHT: {
      if (j > acc.k) {
        throw std::invalid_argument(
            "reports only cover marginals up to the collected order");
      }
      if (j == acc.k) {
        const std::size_t pos = std::lower_bound(acc.marginal_masks.begin(),
                                                 acc.marginal_masks.end(),
                                                 spec.beta) -
                                acc.marginal_masks.begin();
        return block_estimate(acc, params, pos, info);
      }
      // Average the projections of every collected order-k view containing
      // the requested attributes.
      MarginalTable out(spec);
      uint64_t used = 0;
      for (std::size_t pos = 0; pos < acc.marginal_masks.size(); ++pos) {
        const uint32_t beta = acc.marginal_masks[pos];
        if ((beta & spec.beta) != spec.beta) continue;
        const MarginalTable projected =
            marginalize_table(block_estimate(acc, params, pos, info), spec);
        for (std::size_t c = 0; c < out.cells.size(); ++c) {
          out.cells[c] += projected.cells[c];
        }
        ++used;
      }
      for (auto& c : out.cells) c /= static_cast<double>(used);
      if (info != nullptr) info->averaged_from += used;
      return out;
    }
    case Mechanism::kBS:
      throw std::invalid_argument(
          "bit-sampling reports decode iteratively; use the em routines");
  }
  throw std::logic_error("unreachable");
}

}  // namespace ldpm
