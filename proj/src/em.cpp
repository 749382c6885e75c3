#include "ldpm/em.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldpm {

EmResult em_decode(std::span<const uint64_t> counts, double p_bit,
                   const EmConfig& config) {
  const std::size_t m = counts.size();
  const int k = log2_exact(m);
  if (!(p_bit > 0.5) || !(p_bit <= 1.0)) {
    throw std::invalid_argument("bit-keeping probability out of (1/2, 1]");
  }
  if (!(config.omega > 0.0)) throw std::invalid_argument("tolerance must be positive");
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total == 0) throw std::runtime_error("no reports to decode");

  // channel[y][x] = P(report y | truth x) = p^{k-H(x,y)} (1-p)^{H(x,y)}.
  std::vector<double> flip_pow(k + 1);
  for (int h = 0; h <= k; ++h) {
    flip_pow[h] = std::pow(p_bit, k - h) * std::pow(1.0 - p_bit, h);
  }
  auto channel = [&](std::size_t y, std::size_t x) {
    return flip_pow[popcount(static_cast<uint32_t>(x ^ y))];
  };

  const double n = static_cast<double>(total);
  std::vector<double> weight(m);  // n_y / N, skipping zero rows
  for (std::size_t y = 0; y < m; ++y) {
    weight[y] = static_cast<double>(counts[y]) / n;
  }

  EmResult result;
  result.estimate.assign(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m);
  std::vector<double> denom(m);

  while (result.iterations < config.max_iterations) {
    double loglik = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      double sum = 0.0;
      for (std::size_t x = 0; x < m; ++x) sum += result.estimate[x] * channel(y, x);
      denom[y] = sum;
      if (weight[y] > 0.0) loglik += static_cast<double>(counts[y]) * std::log(sum);
    }
    double next_total = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      double resp = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        if (weight[y] > 0.0) resp += weight[y] * channel(y, x) / denom[y];
      }
      next[x] = result.estimate[x] * resp;
      next_total += next[x];
    }
    // The update already sums to one analytically; renormalize to pin down
    // floating-point drift over long runs.
    for (auto& v : next) v /= next_total;

    double delta = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      delta = std::max(delta, std::abs(next[x] - result.estimate[x]));
    }
    result.estimate.swap(next);
    ++result.iterations;
    result.log_likelihood.push_back(loglik);
    if (delta < config.omega) {
      result.converged = true;
      break;
    }
  }
  result.degenerate = result.converged && result.iterations <= 1;
  return result;
}

EmResult em_decode_marginal(const Accumulator& acc, const PrivacyParams& params,
                            const MarginalSpec& spec, const EmConfig& config) {
  if (acc.mechanism != Mechanism::kBS) {
    throw std::invalid_argument("iterative decode expects bit-sampling reports");
  }
  if (spec.d != acc.d) throw std::invalid_argument("dimension mismatch");
  std::vector<uint64_t> counts(spec.table_size(), 0);
  for (uint32_t word = 0; word < acc.joint_counts.size(); ++word) {
    counts[spec.cell_of(word)] += acc.joint_counts[word];
  }
  return em_decode(counts, params.keep_prob, config);
}

}  // namespace ldpm
