#pragma once

#include <cstdint>
#include <vector>

#include "ldpm/aggregate.hpp"
#include "ldpm/data.hpp"
#include "ldpm/em.hpp"

namespace ldpm {

// Randomize every record of the population (record u uses the stream derived
// from (seed, u)) and tally the reports.  The parallel variant shards users
// into fixed blocks and merges block tallies in order; tallies are integers,
// so it matches the serial pass bit for bit at any thread count.
Accumulator simulate_accumulate(const Dataset& population,
                                const PrivacyParams& params, uint64_t seed);
Accumulator simulate_accumulate_parallel(const Dataset& population,
                                         const PrivacyParams& params,
                                         uint64_t seed);

// Same randomization, reports materialized (for writing report files).
std::vector<Report> simulate_reports(const Dataset& population,
                                     const PrivacyParams& params,
                                     uint64_t seed);

// One mechanism run evaluated against the population's own empirical
// distribution: total variation per requested marginal.
struct MarginalScore {
  uint32_t beta = 0;
  double tv = 0.0;
};
std::vector<MarginalScore> evaluate_trial(const Dataset& population,
                                          const PrivacyParams& params,
                                          const std::vector<uint32_t>& betas,
                                          uint64_t report_seed);

// Grid runner shared by the command-line tool and the acceptance checks.
struct ExperimentConfig {
  std::vector<Mechanism> mechanisms;
  int d = 0;
  int k = 2;
  std::vector<double> epsilons;
  std::vector<uint64_t> sizes;  // population sizes N
  uint32_t trials = 1;
  uint64_t seed = 0;
  std::vector<uint32_t> betas;  // defaults to every k-way marginal
};

struct TrialRow {
  Mechanism mechanism{};
  double epsilon = 0.0;
  uint64_t n = 0;
  uint32_t trial = 0;
  uint32_t beta = 0;
  double tv = 0.0;
};

struct GridRow {
  Mechanism mechanism{};
  double epsilon = 0.0;
  uint64_t n = 0;
  double mean_tv = 0.0;
  double stddev_tv = 0.0;  // over trials of the per-trial mean across marginals
};

struct ExperimentResult {
  std::vector<TrialRow> trials;  // grid order: mech, eps, n, trial, beta
  std::vector<GridRow> summary;
};

// Populations are drawn from `source` with a seed derived from (seed, n,
// trial) only, so mechanisms and budgets see identical populations and
// cross-mechanism comparisons are paired.
ExperimentResult run_experiment(const Dataset& source,
                                const ExperimentConfig& config);

}  // namespace ldpm
