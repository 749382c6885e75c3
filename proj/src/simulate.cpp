#include "ldpm/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ldpm {

namespace {

constexpr uint64_t kShardSize = 8192;

// Per-population randomization shared by both passes; `coeffs`/`masks` are
// the sampling tables the HT/Marg mechanisms draw from.
struct RandomizeTables {
  std::vector<uint32_t> coeffs;
  std::vector<uint32_t> masks;
};

RandomizeTables make_tables(const PrivacyParams& params) {
  RandomizeTables t;
  if (params.mechanism == Mechanism::kInpHT) {
    t.coeffs = required_coefficients(params.d, params.k);
  }
  if (is_marginal_mechanism(params.mechanism)) {
    t.masks = kway_masks(params.d, params.k);
  }
  return t;
}

// One user's report, tallied straight into acc without materializing the
// Report struct (the bit mechanisms tally cell by cell).
void randomize_into(Accumulator& acc, uint32_t signal,
                    const PrivacyParams& params, const RandomizeTables& tables,
                    SplitRng& rng) {
  const double p = params.keep_prob;
  switch (params.mechanism) {
    case Mechanism::kInpRS: {
      const std::size_t m = acc.cell_sums.size();
      for (std::size_t cell = 0; cell < m; ++cell) {
        const bool truth = (cell == signal);
        acc.cell_sums[cell] += (rng.bernoulli(p) ? truth : !truth) ? 1 : 0;
      }
      break;
    }
    case Mechanism::kInpPS:
      ++acc.index_counts[ps_index(signal, params.domain_size, p, rng)];
      break;
    case Mechanism::kInpHT: {
      const uint32_t slot = rng.below(static_cast<uint32_t>(tables.coeffs.size()));
      const uint32_t coeff = tables.coeffs[slot];
      const bool negative = (popcount(coeff & signal) & 1) != 0;
      const bool keep = rng.bernoulli(p);
      acc.signed_sums[slot] += (negative == keep) ? -1 : 1;
      ++acc.coeff_counts[slot];
      break;
    }
    case Mechanism::kMargRS: {
      const uint32_t pos = rng.below(static_cast<uint32_t>(tables.masks.size()));
      const uint32_t cell = compact_bits(signal, tables.masks[pos]);
      const std::size_t cells = std::size_t{1} << params.k;
      ++acc.marginal_counts[pos];
      for (std::size_t c = 0; c < cells; ++c) {
        const bool truth = (c == cell);
        acc.cell_sums[pos * cells + c] += (rng.bernoulli(p) ? truth : !truth) ? 1 : 0;
      }
      break;
    }
    case Mechanism::kMargPS: {
      const uint32_t pos = rng.below(static_cast<uint32_t>(tables.masks.size()));
      const uint32_t cell = compact_bits(signal, tables.masks[pos]);
      const std::size_t cells = std::size_t{1} << params.k;
      ++acc.marginal_counts[pos];
      ++acc.index_counts[pos * cells + ps_index(cell, params.domain_size, p, rng)];
      break;
    }
    case Mechanism::kMargHT: {
      const uint32_t pos = rng.below(static_cast<uint32_t>(tables.masks.size()));
      const uint32_t cell = compact_bits(signal, tables.masks[pos]);
      const std::size_t nz = (std::size_t{1} << params.k) - 1;
      const uint32_t coeff = 1 + rng.below(static_cast<uint32_t>(nz));
      const bool negative = (popcount(coeff & cell) & 1) != 0;
      const bool keep = rng.bernoulli(p);
      ++acc.marginal_counts[pos];
      acc.signed_sums[pos * nz + (coeff - 1)] += (negative == keep) ? -1 : 1;
      ++acc.coeff_counts[pos * nz + (coeff - 1)];
      break;
    }
    case Mechanism::kBS: {
      uint32_t word = 0;
      for (int attr = 0; attr < params.d; ++attr) {
        const bool value = (signal & attribute_bit(params.d, attr)) != 0;
        if (rng.bernoulli(p) ? value : !value) word |= attribute_bit(params.d, attr);
      }
      ++acc.joint_counts[word];
      break;
    }
  }
  ++acc.total_reports;
}

void check_population(const Dataset& population, const PrivacyParams& params) {
  if (population.d != params.d) {
    throw std::invalid_argument("population dimension does not match mechanism");
  }
  if (population.records.empty()) {
    throw std::invalid_argument("empty population");
  }
}

}  // namespace

Accumulator simulate_accumulate(const Dataset& population,
                                const PrivacyParams& params, uint64_t seed) {
  check_population(population, params);
  const RandomizeTables tables = make_tables(params);
  Accumulator acc = Accumulator::make(params);
  for (std::size_t u = 0; u < population.records.size(); ++u) {
    SplitRng rng = SplitRng::for_user(seed, u);
    randomize_into(acc, population.records[u], params, tables, rng);
  }
  return acc;
}

Accumulator simulate_accumulate_parallel(const Dataset& population,
                                         const PrivacyParams& params,
                                         uint64_t seed) {
  check_population(population, params);
  const RandomizeTables tables = make_tables(params);
  const uint64_t n = population.records.size();
  const uint64_t shards = (n + kShardSize - 1) / kShardSize;
  std::vector<Accumulator> partial(shards);
  const auto count = static_cast<int64_t>(shards);
#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < count; ++s) {
    Accumulator local = Accumulator::make(params);
    const uint64_t begin = static_cast<uint64_t>(s) * kShardSize;
    const uint64_t end = std::min(n, begin + kShardSize);
    for (uint64_t u = begin; u < end; ++u) {
      SplitRng rng = SplitRng::for_user(seed, u);
      randomize_into(local, population.records[u], params, tables, rng);
    }
    partial[static_cast<std::size_t>(s)] = std::move(local);
  }
  Accumulator acc = std::move(partial[0]);
  for (uint64_t s = 1; s < shards; ++s) merge_into(acc, partial[s]);
  return acc;
}

std::vector<Report> simulate_reports(const Dataset& population,
                                     const PrivacyParams& params,
                                     uint64_t seed) {
  check_population(population, params);
  std::vector<Report> reports;
  reports.reserve(population.records.size());
  for (std::size_t u = 0; u < population.records.size(); ++u) {
    SplitRng rng = SplitRng::for_user(seed, u);
    reports.push_back(client_randomize(population.records[u], params, rng));
  }
  return reports;
}

std::vector<MarginalScore> evaluate_trial(const Dataset& population,
                                          const PrivacyParams& params,
                                          const std::vector<uint32_t>& betas,
                                          uint64_t report_seed) {
  const Accumulator acc =
      simulate_accumulate_parallel(population, params, report_seed);
  const Distribution truth = population.empirical();
  std::vector<MarginalScore> scores;
  scores.reserve(betas.size());
  for (uint32_t beta : betas) {
    const MarginalSpec spec(params.d, beta);
    MarginalTable estimate;
    if (params.mechanism == Mechanism::kBS) {
      const EmResult em = em_decode_marginal(acc, params, spec);
      estimate = MarginalTable(spec);
      estimate.cells = em.estimate;
    } else {
      estimate = reconstruct_marginal(acc, spec, params);
    }
    const MarginalTable exact = marginal_operator(truth, spec);
    scores.push_back({beta, total_variation(estimate, exact)});
  }
  return scores;
}

ExperimentResult run_experiment(const Dataset& source,
                                const ExperimentConfig& config) {
  if (config.mechanisms.empty() || config.epsilons.empty() ||
      config.sizes.empty() || config.trials == 0) {
    throw std::invalid_argument("experiment grid is empty");
  }
  std::vector<uint32_t> betas = config.betas;
  if (betas.empty()) betas = kway_masks(config.d, config.k);
  for (uint32_t beta : betas) {
    if (popcount(beta) != config.k) {
      throw std::invalid_argument("requested marginal is not order k");
    }
  }
  if (source.d != config.d) {
    throw std::invalid_argument("dataset dimension does not match config");
  }

  ExperimentResult result;
  for (Mechanism mech : config.mechanisms) {
    for (double eps : config.epsilons) {
      const PrivacyParams params =
          PrivacyParams::make(mech, eps, config.d, config.k);
      for (uint64_t n : config.sizes) {
        double sum = 0.0;
        double sumsq = 0.0;
        for (uint32_t trial = 0; trial < config.trials; ++trial) {
          const uint64_t pop_seed = derive_seed(config.seed, 1, n, trial);
          const uint64_t report_seed =
              derive_seed(config.seed, 2, static_cast<uint64_t>(mech),
                          std::bit_cast<uint64_t>(eps), n, trial);
          const Dataset population = sample_population(source, n, pop_seed);
          const auto scores =
              evaluate_trial(population, params, betas, report_seed);
          double trial_mean = 0.0;
          for (const MarginalScore& s : scores) {
            result.trials.push_back({mech, eps, n, trial, s.beta, s.tv});
            trial_mean += s.tv;
          }
          trial_mean /= static_cast<double>(scores.size());
          sum += trial_mean;
          sumsq += trial_mean * trial_mean;
        }
        const double t = static_cast<double>(config.trials);
        const double mean = sum / t;
        const double var = std::max(0.0, sumsq / t - mean * mean);
        result.summary.push_back(
            {mech, eps, n, mean,
             config.trials > 1 ? std::sqrt(var * t / (t - 1.0)) : 0.0});
      }
    }
  }
  return result;
}

}  // namespace ldpm
