#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ldpm/analysis.hpp"
#include "ldpm/rng.hpp"

using namespace ldpm;

namespace {

MarginalTable table2(double c00, double c01, double c10, double c11) {
  MarginalTable t{MarginalSpec(2, 0b11)};
  t.cells = {c00, c01, c10, c11};
  return t;
}

// Oracle: decode a Pruefer sequence into tree edges (O(n^2), test-only).
std::vector<std::pair<int, int>> pruefer_tree(const std::vector<int>& seq,
                                              int n) {
  std::vector<int> degree(n, 1);
  for (int x : seq) ++degree[x];
  std::vector<std::pair<int, int>> edges;
  std::vector<bool> used(n, false);
  for (int x : seq) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1 && !used[leaf]) {
        edges.emplace_back(std::min(leaf, x), std::max(leaf, x));
        used[leaf] = true;
        --degree[x];
        break;
      }
    }
  }
  int a = -1;
  for (int v = 0; v < n; ++v) {
    if (!used[v] && degree[v] == 1) {
      if (a < 0) {
        a = v;
      } else {
        edges.emplace_back(a, v);
      }
    }
  }
  return edges;
}

double best_tree_weight(int n, const std::vector<std::vector<double>>& w) {
  // Every labelled tree on n nodes appears for exactly one sequence.
  std::vector<int> seq(n - 2, 0);
  double best = -1e300;
  while (true) {
    double total = 0.0;
    for (const auto& [a, b] : pruefer_tree(seq, n)) total += w[a][b];
    best = std::max(best, total);
    int pos = static_cast<int>(seq.size()) - 1;
    while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
    if (pos < 0) break;
    ++seq[pos];
  }
  return best;
}

}  // namespace

TEST_CASE("independence statistic on the worked two-attribute example") {
  // Joint 00->0.55, 01->0.15, 10->0.10, 11->0.20; margins (0.7,0.3)/(0.65,0.35).
  const MarginalTable t = table2(0.55, 0.15, 0.10, 0.20);
  const uint64_t n = 10000;
  const ChiSquareResult r = chi_square(t, n);
  CHECK(r.statistic ==
        doctest::Approx(n * 0.18890633176347463).epsilon(1e-9));
  CHECK(std::abs(r.critical_value - 3.8415) < 1e-4);
  CHECK(r.dependent);
  CHECK(r.n == n);
}

TEST_CASE("a product table is judged independent") {
  const double pa = 0.7;
  const double pb = 0.65;
  const MarginalTable t = table2((1 - pa) * (1 - pb), (1 - pa) * pb,
                                 pa * (1 - pb), pa * pb);
  const ChiSquareResult r = chi_square(t, 100000);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_FALSE(r.dependent);
}

TEST_CASE("degenerate margins are an error, off-simplex input is repaired") {
  CHECK_THROWS_AS(chi_square(table2(0.5, 0.5, 0.0, 0.0), 100),
                  std::runtime_error);
  CHECK_THROWS_AS(chi_square(table2(0.25, 0.25, 0.25, 0.25), 0),
                  std::invalid_argument);
  // Slightly negative estimate cell: clipped, not fatal.
  const ChiSquareResult r = chi_square(table2(-0.02, 0.32, 0.40, 0.30), 1000);
  CHECK(std::isfinite(r.statistic));
  MarginalTable three{MarginalSpec(3, 0b111)};
  CHECK_THROWS_AS(chi_square(three, 100), std::invalid_argument);
}

TEST_CASE("mutual information on the worked example and the product case") {
  CHECK(mutual_information(table2(0.55, 0.15, 0.10, 0.20)) ==
        doctest::Approx(0.0927865011548278).epsilon(1e-9));
  CHECK(mutual_information(table2(0.7 * 0.65, 0.7 * 0.35, 0.3 * 0.65,
                                  0.3 * 0.35)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // Zero cells contribute nothing (0 log 0 = 0): perfectly correlated pair.
  CHECK(mutual_information(table2(0.5, 0.0, 0.0, 0.5)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("the selected tree attains the exhaustive maximum") {
  SplitRng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        // Coarse grid so ties actually happen.
        w[a][b] = w[b][a] = 0.1 * static_cast<double>(rng.below(8));
      }
    }
    const DependencyTree tree = max_weight_spanning_tree(n, w);
    CHECK(tree.edges.size() == static_cast<std::size_t>(n - 1));
    CHECK(tree.total_weight ==
          doctest::Approx(best_tree_weight(n, w)).epsilon(1e-12));
    // The returned edges really form a spanning tree.
    std::vector<int> parent(n);
    for (int v = 0; v < n; ++v) parent[v] = v;
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (const TreeEdge& e : tree.edges) {
      CHECK(find(e.a) != find(e.b));
      parent[find(e.a)] = find(e.b);
    }
  }
}

TEST_CASE("tie-breaking is deterministic and order-preserving") {
  const int n = 4;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 1.0));
  const DependencyTree tree = max_weight_spanning_tree(n, w);
  // All weights equal: the smallest edges win.
  REQUIRE(tree.edges.size() == 3);
  CHECK(tree.edges[0].a == 0);
  CHECK(tree.edges[0].b == 1);
  CHECK(tree.edges[1].a == 0);
  CHECK(tree.edges[1].b == 2);
  CHECK(tree.edges[2].a == 0);
  CHECK(tree.edges[2].b == 3);

  // A monotone reweighting keeps the same structure.
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  SplitRng rng(77);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) v[a][b] = v[b][a] = rng.next_double();
  }
  const DependencyTree t1 = max_weight_spanning_tree(n, v);
  for (auto& row : v) {
    for (auto& x : row) x = 3.0 * x + 2.0;
  }
  const DependencyTree t2 = max_weight_spanning_tree(n, v);
  REQUIRE(t1.edges.size() == t2.edges.size());
  for (std::size_t i = 0; i < t1.edges.size(); ++i) {
    CHECK(t1.edges[i].a == t2.edges[i].a);
    CHECK(t1.edges[i].b == t2.edges[i].b);
  }
}

TEST_CASE("structure learning recovers a strong chain") {
  // X0 fair; each later bit copies its predecessor with probability 0.9.
  // The adjacent pairs dominate, so the learned tree is the path.
  const int d = 4;
  Distribution joint(d);
  for (uint32_t x = 0; x < joint.size(); ++x) {
    double p = 0.5;
    for (int attr = 1; attr < d; ++attr) {
      const bool prev = (x & attribute_bit(d, attr - 1)) != 0;
      const bool cur = (x & attribute_bit(d, attr)) != 0;
      p *= (cur == prev) ? 0.9 : 0.1;
    }
    joint.cells[x] = p;
  }
  std::vector<MarginalTable> pairs;
  for (uint32_t beta : kway_masks(d, 2)) {
    pairs.push_back(marginal_operator(joint, MarginalSpec(d, beta)));
  }
  const DependencyTree tree = chow_liu(d, pairs);
  std::set<std::pair<int, int>> edges;
  for (const TreeEdge& e : tree.edges) edges.insert({e.a, e.b});
  const std::set<std::pair<int, int>> expected = {{0, 1}, {1, 2}, {2, 3}};
  CHECK(edges == expected);
  CHECK(tree.total_weight ==
        doctest::Approx(tree_score(tree, d, pairs)).epsilon(1e-12));
}

TEST_CASE("structure learning rejects incomplete or duplicated inputs") {
  const int d = 3;
  Distribution joint = Distribution::uniform(d);
  std::vector<MarginalTable> pairs;
  for (uint32_t beta : kway_masks(d, 2)) {
    pairs.push_back(marginal_operator(joint, MarginalSpec(d, beta)));
  }
  std::vector<MarginalTable> missing(pairs.begin(), pairs.end() - 1);
  CHECK_THROWS_AS(chow_liu(d, missing), std::invalid_argument);
  std::vector<MarginalTable> duplicated = pairs;
  duplicated.push_back(pairs[0]);
  CHECK_THROWS_AS(chow_liu(d, duplicated), std::invalid_argument);
}
