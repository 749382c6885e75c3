#include "ldpm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ldpm {

namespace {

// Clipped table plus its two 1-way margins; shared by the 2-way analyses.
struct PairView {
  double cell[4];  // compact index: bit 1 = first attribute, bit 0 = second
  double first1, second1;
};

PairView pair_view(const MarginalTable& table) {
  if (table.spec.k() != 2) {
    throw std::invalid_argument("analysis expects a 2-way table");
  }
  const MarginalTable t = clip_renormalize(table);
  PairView v{};
  for (int c = 0; c < 4; ++c) v.cell[c] = t.cells[c];
  v.first1 = v.cell[2] + v.cell[3];
  v.second1 = v.cell[1] + v.cell[3];
  return v;
}

}  // namespace

ChiSquareResult chi_square(const MarginalTable& table, uint64_t n) {
  if (n == 0) throw std::invalid_argument("test needs a positive sample size");
  const PairView v = pair_view(table);
  const double pa[2] = {1.0 - v.first1, v.first1};
  const double pb[2] = {1.0 - v.second1, v.second1};
  double sum = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double expected = pa[a] * pb[b];
      if (expected == 0.0) {
        throw std::runtime_error("degenerate margin: expected cell is zero");
      }
      const double diff = v.cell[(a << 1) | b] - expected;
      sum += diff * diff / expected;
    }
  }
  ChiSquareResult r;
  r.statistic = static_cast<double>(n) * sum;
  r.n = n;
  r.dependent = r.statistic > r.critical_value;
  return r;
}

double mutual_information(const MarginalTable& table) {
  const PairView v = pair_view(table);
  const double pa[2] = {1.0 - v.first1, v.first1};
  const double pb[2] = {1.0 - v.second1, v.second1};
  double mi = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double p = v.cell[(a << 1) | b];
      if (p <= 0.0) continue;
      mi += p * std::log(p / (pa[a] * pb[b]));
    }
  }
  return mi;
}

DependencyTree max_weight_spanning_tree(
    int nodes, const std::vector<std::vector<double>>& weight) {
  if (nodes < 2) throw std::invalid_argument("need at least two nodes");
  struct Edge {
    int a, b;
    double w;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(nodes) * (nodes - 1) / 2);
  for (int a = 0; a < nodes; ++a) {
    for (int b = a + 1; b < nodes; ++b) {
      edges.push_back({a, b, weight.at(a).at(b)});
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<int> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  DependencyTree tree;
  tree.nodes = nodes;
  for (const Edge& e : edges) {
    const int ra = find(e.a);
    const int rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    tree.edges.push_back({e.a, e.b, e.w});
    tree.total_weight += e.w;
    if (static_cast<int>(tree.edges.size()) == nodes - 1) break;
  }
  return tree;
}

namespace {

// weight[a][b] of pairwise MI, plus a presence check for every pair.
std::vector<std::vector<double>> pair_mi_matrix(
    int d, const std::vector<MarginalTable>& pair_tables) {
  validate_dimension(d);
  std::vector<std::vector<double>> w(d, std::vector<double>(d, 0.0));
  std::vector<std::vector<bool>> seen(d, std::vector<bool>(d, false));
  for (const MarginalTable& t : pair_tables) {
    if (t.spec.d != d || t.spec.k() != 2) {
      throw std::invalid_argument("structure learning expects 2-way tables");
    }
    // Mask bits back to attribute positions: high bit = first attribute.
    int attrs[2];
    int found = 0;
    for (int attr = 0; attr < d; ++attr) {
      if (t.spec.beta & attribute_bit(d, attr)) attrs[found++] = attr;
    }
    const double mi = mutual_information(t);
    w[attrs[0]][attrs[1]] = mi;
    w[attrs[1]][attrs[0]] = mi;
    if (seen[attrs[0]][attrs[1]]) {
      throw std::invalid_argument("duplicate table for an attribute pair");
    }
    seen[attrs[0]][attrs[1]] = true;
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      if (!seen[a][b]) {
        throw std::invalid_argument("missing table for an attribute pair");
      }
    }
  }
  return w;
}

}  // namespace

DependencyTree chow_liu(int d, const std::vector<MarginalTable>& pair_tables) {
  return max_weight_spanning_tree(d, pair_mi_matrix(d, pair_tables));
}

double tree_score(const DependencyTree& tree, int d,
                  const std::vector<MarginalTable>& pair_tables) {
  const auto w = pair_mi_matrix(d, pair_tables);
  double total = 0.0;
  for (const TreeEdge& e : tree.edges) total += w.at(e.a).at(e.b);
  return total;
}

}  // namespace ldpm
