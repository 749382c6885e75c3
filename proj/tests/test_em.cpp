#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ldpm/em.hpp"
#include "ldpm/simulate.hpp"

using namespace ldpm;

namespace {

// Independent oracle: the per-bit channel over k bits is a Kronecker power of
// the 2x2 response matrix, which is invertible for p > 1/2; solve M f = q by
// applying the 2x2 inverse along each axis.
std::vector<double> linear_inverse(std::span<const uint64_t> counts, double p) {
  const std::size_t m = counts.size();
  const int k = log2_exact(m);
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  // inverse of [[p, 1-p], [1-p, p]] is 1/(2p-1) [[p, -(1-p)], [-(1-p), p]]
  const double det = 2.0 * p - 1.0;
  for (int axis = 0; axis < k; ++axis) {
    const std::size_t stride = std::size_t{1} << axis;
    for (std::size_t base = 0; base < m; ++base) {
      if (base & stride) continue;
      const double a = f[base];
      const double b = f[base | stride];
      f[base] = (p * a - (1.0 - p) * b) / det;
      f[base | stride] = (p * b - (1.0 - p) * a) / det;
    }
  }
  return f;
}

}  // namespace

TEST_CASE("a noise-free channel converges in at most two sweeps") {
  const std::vector<uint64_t> counts = {10, 40, 30, 20};
  const EmResult r = em_decode(counts, 1.0);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(r.estimate[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.estimate[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.estimate[2] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.estimate[3] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("uniform observations stop immediately and are flagged") {
  const std::vector<uint64_t> counts = {25, 25, 25, 25};
  const EmResult r = em_decode(counts, 0.8);
  CHECK(r.converged);
  CHECK(r.degenerate);
  CHECK(r.iterations <= 1);
  for (double c : r.estimate) CHECK(c == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("the likelihood trace never decreases") {
  const std::vector<uint64_t> counts = {150, 30, 41, 7, 90, 15, 160, 22};
  const EmResult r = em_decode(counts, 0.7, {1e-9, 50000});
  REQUIRE(r.log_likelihood.size() >= 2);
  for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
    CHECK(r.log_likelihood[i] >= r.log_likelihood[i - 1] - 1e-9);
  }
  double sum = 0.0;
  for (double c : r.estimate) {
    CHECK(c >= 0.0);
    sum += c;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("with an interior optimum the decoder matches linear inversion") {
  // Exact observed fractions from theta = (0.4, 0.3, 0.2, 0.1) through the
  // p = 0.8 channel; the perfect-fit solution is interior, so the iterative
  // decoder and the matrix inverse must agree.
  const double p = 0.8;
  const std::vector<double> theta = {0.4, 0.3, 0.2, 0.1};
  std::vector<uint64_t> counts(4);
  for (int y = 0; y < 4; ++y) {
    double q = 0.0;
    for (int x = 0; x < 4; ++x) {
      const int h = popcount(static_cast<uint32_t>(x ^ y));
      q += theta[x] * std::pow(p, 2 - h) * std::pow(1 - p, h);
    }
    counts[y] = static_cast<uint64_t>(std::llround(q * 100000.0));
  }
  const auto oracle = linear_inverse(counts, p);
  const EmResult r = em_decode(counts, p, {1e-12, 500000});
  CHECK(r.converged);
  for (int x = 0; x < 4; ++x) {
    CHECK(oracle[x] == doctest::Approx(theta[x]).epsilon(1e-4));
    CHECK(r.estimate[x] == doctest::Approx(theta[x]).epsilon(1e-3));
  }
}

TEST_CASE("marginal decode equals decoding the restricted counts") {
  const auto params = PrivacyParams::make(Mechanism::kBS, 2.0, 4, 2);
  ChainModel model;
  model.base = {0.3, 0.6, 0.5, 0.4};
  model.agree = {0.8, 0.7, 0.6};
  const auto population = synth_generate(model, 5000, 11);
  const Accumulator acc = simulate_accumulate(population, params, 13);

  const MarginalSpec spec(4, 0b1010);
  const EmResult via_acc = em_decode_marginal(acc, params, spec);

  std::vector<uint64_t> restricted(4, 0);
  for (uint32_t word = 0; word < acc.joint_counts.size(); ++word) {
    restricted[spec.cell_of(word)] += acc.joint_counts[word];
  }
  const EmResult direct = em_decode(restricted, params.keep_prob);
  REQUIRE(via_acc.estimate.size() == direct.estimate.size());
  for (std::size_t i = 0; i < direct.estimate.size(); ++i) {
    CHECK(via_acc.estimate[i] == direct.estimate[i]);
  }
}

TEST_CASE("input validation") {
  const std::vector<uint64_t> empty = {0, 0, 0, 0};
  CHECK_THROWS_AS(em_decode(empty, 0.8), std::runtime_error);
  const std::vector<uint64_t> counts = {1, 2, 3, 4};
  CHECK_THROWS_AS(em_decode(counts, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(em_decode(counts, 1.2), std::invalid_argument);
  const std::vector<uint64_t> odd = {1, 2, 3};
  CHECK_THROWS_AS(em_decode(odd, 0.8), std::invalid_argument);
  EmConfig bad;
  bad.omega = 0.0;
  CHECK_THROWS_AS(em_decode(counts, 0.8, bad), std::invalid_argument);
}
