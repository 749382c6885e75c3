// Serial vs OpenMP timings for the three hot kernels: the in-place transform,
// the marginal summation, and population randomization + tally.
#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "ldpm/hadamard.hpp"
#include "ldpm/simulate.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_of(const Clock::time_point& begin, const Clock::time_point& end) {
  return std::chrono::duration<double>(end - begin).count();
}

template <typename F>
double time_best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto begin = Clock::now();
    f();
    const auto end = Clock::now();
    best = std::min(best, seconds_of(begin, end));
  }
  return best;
}

void bench_fwht(int d, int repeats) {
  const std::size_t n = std::size_t{1} << d;
  std::vector<double> base(n);
  ldpm::SplitRng rng(7);
  for (auto& v : base) v = rng.next_double();

  std::vector<double> work(n);
  const double serial = time_best_of(repeats, [&] {
    work = base;
    ldpm::fwht_serial(work);
  });
  const double parallel = time_best_of(repeats, [&] {
    work = base;
    ldpm::fwht_parallel(work);
  });
  std::printf("fwht            d=%2d  serial %8.4f ms  parallel %8.4f ms  speedup %.2fx\n",
              d, serial * 1e3, parallel * 1e3, serial / parallel);
}

void bench_marginal(int d, int k, int repeats) {
  const ldpm::Distribution t = ldpm::Distribution::uniform(d);
  const ldpm::MarginalSpec spec(d, (1u << k) - 1);
  const double serial = time_best_of(
      repeats, [&] { (void)ldpm::marginal_operator(t, spec); });
  const double parallel = time_best_of(
      repeats, [&] { (void)ldpm::marginal_operator_parallel(t, spec); });
  std::printf("marginal        d=%2d  serial %8.4f ms  parallel %8.4f ms  speedup %.2fx\n",
              d, serial * 1e3, parallel * 1e3, serial / parallel);
}

void bench_simulate(ldpm::Mechanism mech, int d, int k, uint64_t n,
                    int repeats) {
  const auto params = ldpm::PrivacyParams::make(mech, 1.1, d, k);
  ldpm::ChainModel model;
  model.base.assign(d, 0.4);
  model.agree.assign(d - 1, 0.7);
  const auto population = ldpm::synth_generate(model, n, 11);
  const double serial = time_best_of(repeats, [&] {
    (void)ldpm::simulate_accumulate(population, params, 3);
  });
  const double parallel = time_best_of(repeats, [&] {
    (void)ldpm::simulate_accumulate_parallel(population, params, 3);
  });
  std::printf("simulate %-6s d=%2d  serial %8.2f ms  parallel %8.2f ms  speedup %.2fx\n",
              std::string(ldpm::mechanism_name(mech)).c_str(), d, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_fwht(16, 5);
  bench_fwht(20, 3);
  bench_marginal(16, 2, 5);
  bench_marginal(20, 2, 3);
  bench_simulate(ldpm::Mechanism::kInpRS, 10, 2, 1 << 15, 3);
  bench_simulate(ldpm::Mechanism::kInpHT, 16, 2, 1 << 17, 3);
  bench_simulate(ldpm::Mechanism::kMargPS, 16, 2, 1 << 17, 3);
  return 0;
}
