#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ldpm/core.hpp"
#include "ldpm/rng.hpp"

using namespace ldpm;

namespace {

Distribution random_distribution(int d, uint64_t seed) {
  SplitRng rng(seed);
  Distribution t(d);
  double sum = 0.0;
  for (auto& c : t.cells) {
    c = rng.next_double();
    sum += c;
  }
  for (auto& c : t.cells) c /= sum;
  return t;
}

}  // namespace

TEST_CASE("bit gather/scatter invert each other on the masked subspace") {
  SplitRng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const uint32_t mask = rng.below(1u << 16);
    if (mask == 0) continue;
    const int k = popcount(mask);
    const uint32_t value = rng.below(1u << k);
    CHECK(compact_bits(expand_bits(value, mask), mask) == value);
    const uint32_t full = rng.below(1u << 16);
    CHECK((expand_bits(compact_bits(full, mask), mask) & mask) == (full & mask));
  }
  // expand is monotone for a fixed mask
  const uint32_t mask = 0b1011010;
  uint32_t prev = expand_bits(0, mask);
  for (uint32_t v = 1; v < 16; ++v) {
    const uint32_t cur = expand_bits(v, mask);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("first attribute occupies the most significant bit") {
  CHECK(attribute_bit(4, 0) == 0b1000);
  CHECK(attribute_bit(4, 3) == 0b0001);
  // d=3, attributes {0,2}: record 0b100 has attribute 0 set, attribute 2
  // clear, so the compact cell is 0b10.
  const MarginalSpec spec(3, 0b101);
  CHECK(spec.cell_of(0b100) == 0b10);
  CHECK(spec.cell_of(0b001) == 0b01);
  CHECK(spec.cell_of(0b110) == 0b10);
  CHECK(spec.cell_of(0b111) == 0b11);
}

TEST_CASE("mask enumeration is complete, sorted, and counted by binomials") {
  for (int d = 1; d <= 12; ++d) {
    for (int k = 1; k <= d && k <= 4; ++k) {
      const auto masks = kway_masks(d, k);
      CHECK(masks.size() == binomial(d, k));
      for (std::size_t i = 0; i < masks.size(); ++i) {
        CHECK(popcount(masks[i]) == k);
        CHECK((masks[i] >> d) == 0);
        if (i > 0) CHECK(masks[i] > masks[i - 1]);
      }
    }
  }
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(8, 2) == 28);
  CHECK(binomial(24, 3) == 2024);
}

TEST_CASE("dimension and spec validation") {
  CHECK_THROWS_AS(Distribution(0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution(25), std::invalid_argument);
  CHECK_NOTHROW(Distribution(1));
  CHECK_THROWS_AS(MarginalSpec(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(MarginalSpec(3, 0b1000), std::invalid_argument);
  CHECK_THROWS_AS(kway_masks(4, 0), std::invalid_argument);
  CHECK_THROWS_AS(kway_masks(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::point_mass(2, 4), std::invalid_argument);
}

TEST_CASE("is_distribution accepts the simplex and rejects junk") {
  CHECK(is_distribution(std::vector<double>{0.5, 0.5}));
  CHECK(is_distribution(std::vector<double>{1.0, 0.0}));
  CHECK_FALSE(is_distribution(std::vector<double>{0.6, 0.6}));
  CHECK_FALSE(is_distribution(std::vector<double>{-0.1, 1.1}));
}

TEST_CASE("two-attribute example: marginals, masses, and distance") {
  // Joint (first,second): 00->0.55, 01->0.15, 10->0.10, 11->0.20.
  Distribution t(2);
  t.cells = {0.55, 0.15, 0.10, 0.20};

  const MarginalTable first = marginal_operator(t, MarginalSpec(2, 0b10));
  CHECK(first.cells[0] == doctest::Approx(0.70));
  CHECK(first.cells[1] == doctest::Approx(0.30));
  const MarginalTable second = marginal_operator(t, MarginalSpec(2, 0b01));
  CHECK(second.cells[0] == doctest::Approx(0.65));
  CHECK(second.cells[1] == doctest::Approx(0.35));

  const MarginalTable full = marginal_operator(t, MarginalSpec(2, 0b11));
  MarginalTable uniform(MarginalSpec(2, 0b11));
  uniform.cells = {0.25, 0.25, 0.25, 0.25};
  CHECK(total_variation(full, uniform) == doctest::Approx(0.30).epsilon(1e-12));
}

TEST_CASE("marginal masses sum to the total mass") {
  for (int d = 2; d <= 8; d += 3) {
    const Distribution t = random_distribution(d, 100 + d);
    for (uint32_t beta : kway_masks(d, std::min(2, d))) {
      const MarginalTable m = marginal_operator(t, MarginalSpec(d, beta));
      double sum = 0.0;
      for (double c : m.cells) sum += c;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("point mass lands in exactly one marginal cell") {
  const Distribution t = Distribution::point_mass(5, 0b10110);
  const MarginalSpec spec(5, 0b10100);
  const MarginalTable m = marginal_operator(t, spec);
  for (uint32_t c = 0; c < m.cells.size(); ++c) {
    CHECK(m.cells[c] == (c == spec.cell_of(0b10110) ? 1.0 : 0.0));
  }
}

TEST_CASE("parallel marginal summation is bit-identical to serial") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    const Distribution t = random_distribution(9, 7000 + seed);
    SplitRng rng(900 + seed);
    for (int k = 1; k <= 3; ++k) {
      const auto masks = kway_masks(9, k);
      const uint32_t beta = masks[rng.below(static_cast<uint32_t>(masks.size()))];
      const MarginalTable a = marginal_operator(t, MarginalSpec(9, beta));
      const MarginalTable b = marginal_operator_parallel(t, MarginalSpec(9, beta));
      REQUIRE(a.cells.size() == b.cells.size());
      for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i] == b.cells[i]);  // exact
      }
    }
  }
}

TEST_CASE("marginalizing a marginal matches marginalizing the joint") {
  const Distribution t = random_distribution(7, 55);
  const MarginalSpec big(7, 0b1011010);
  const MarginalTable outer = marginal_operator(t, big);
  const MarginalSpec small(7, 0b0011000);
  const MarginalTable nested = marginalize_table(outer, small);
  const MarginalTable direct = marginal_operator(t, small);
  for (std::size_t i = 0; i < nested.cells.size(); ++i) {
    CHECK(nested.cells[i] == doctest::Approx(direct.cells[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(marginalize_table(outer, MarginalSpec(7, 0b0000101)),
                  std::invalid_argument);
}

TEST_CASE("total variation basics") {
  MarginalTable a{MarginalSpec(2, 0b11)};
  MarginalTable b{MarginalSpec(2, 0b11)};
  a.cells = {1.0, 0.0, 0.0, 0.0};
  b.cells = {0.0, 0.0, 0.0, 1.0};
  CHECK(total_variation(a, b) == doctest::Approx(1.0));
  CHECK(total_variation(a, a) == 0.0);
  CHECK(total_variation(a, b) == total_variation(b, a));
  MarginalTable c{MarginalSpec(2, 0b01)};
  c.cells = {0.5, 0.5};
  CHECK_THROWS_AS(total_variation(a, c), std::invalid_argument);
}

TEST_CASE("clipping projects stray estimates back onto the simplex") {
  MarginalTable t{MarginalSpec(2, 0b11)};
  t.cells = {-0.05, 0.30, 0.45, 0.40};
  const MarginalTable clipped = clip_renormalize(t);
  double sum = 0.0;
  for (double c : clipped.cells) {
    CHECK(c >= 0.0);
    sum += c;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(clipped.cells[0] == 0.0);

  MarginalTable zero{MarginalSpec(1, 0b1)};
  zero.cells = {-0.3, -0.1};
  const MarginalTable uniform = clip_renormalize(zero);
  CHECK(uniform.cells[0] == doctest::Approx(0.5));
  CHECK(uniform.cells[1] == doctest::Approx(0.5));
}

TEST_CASE("split streams are deterministic and user-indexed") {
  SplitRng a = SplitRng::for_user(123, 5);
  SplitRng b = SplitRng::for_user(123, 5);
  SplitRng c = SplitRng::for_user(123, 6);
  bool all_same = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const uint64_t va = a.next();
    all_same = all_same && (va == b.next());
    any_diff = any_diff || (va != c.next());
  }
  CHECK(all_same);
  CHECK(any_diff);
}

TEST_CASE("bounded draws stay in range and cover the range") {
  SplitRng rng(9);
  std::vector<int> seen(10, 0);
  for (int i = 0; i < 5000; ++i) ++seen[rng.below(10)];
  for (int count : seen) CHECK(count > 300);  // ~500 expected
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}
