#pragma once

#include <cstdint>
#include <vector>

#include "ldpm/core.hpp"

namespace ldpm {

// chi-square critical value, one degree of freedom, 95% confidence.
inline constexpr double kChiSquareCritical = 3.841458820694124;

struct ChiSquareResult {
  double statistic = 0.0;
  double critical_value = kChiSquareCritical;
  bool dependent = false;
  uint64_t n = 0;
};

// Pearson independence test on a 2-way table of fractions backed by n
// reports.  The table is clipped/renormalized first (estimates may stray off
// the simplex); expected cells come from the product of the two 1-way
// margins.  Throws if any expected cell is zero.
ChiSquareResult chi_square(const MarginalTable& table, uint64_t n);

// Mutual information (natural log) of a 2-way table, 0 log 0 := 0.
double mutual_information(const MarginalTable& table);

struct TreeEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

struct DependencyTree {
  int nodes = 0;
  std::vector<TreeEdge> edges;  // nodes - 1 of them, each with a < b
  double total_weight = 0.0;
};

// Maximum-weight spanning tree over the complete graph on `nodes` vertices;
// weight[a][b] for a < b.  Ties are broken toward the lexicographically
// smallest edge so the result is deterministic.
DependencyTree max_weight_spanning_tree(
    int nodes, const std::vector<std::vector<double>>& weight);

// Dependency-tree structure learning: needs one 2-way table per attribute
// pair, scores edges by mutual information, keeps the heaviest tree.
DependencyTree chow_liu(int d, const std::vector<MarginalTable>& pair_tables);

// Re-score a learned structure against another set of pair tables (e.g. a
// privately learned tree against the true tables).
double tree_score(const DependencyTree& tree, int d,
                  const std::vector<MarginalTable>& pair_tables);

}  // namespace ldpm
