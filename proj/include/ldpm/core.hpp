#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ldpm/bits.hpp"

namespace ldpm {

// Hard cap on the number of binary attributes a full joint table may span:
// 2^24 cells is the largest table the tooling will allocate densely.
inline constexpr int kMaxDimensions = 24;

void validate_dimension(int d);

// Full joint distribution over d binary attributes, dense vector of 2^d cell
// masses indexed by the packed attribute word (first attribute = high bit).
struct Distribution {
  int d = 0;
  std::vector<double> cells;

  Distribution() = default;
  explicit Distribution(int d_);

  static Distribution uniform(int d);
  static Distribution point_mass(int d, uint32_t index);

  std::size_t size() const { return cells.size(); }
  double& operator[](uint32_t i) { return cells[i]; }
  double operator[](uint32_t i) const { return cells[i]; }
};

// Nonnegative cells summing to 1 within tol.
bool is_distribution(std::span<const double> cells, double tol = 1e-9);

// Identifies one k-way marginal: beta is a d-bit mask whose set bits are the
// retained attributes.
struct MarginalSpec {
  int d = 0;
  uint32_t beta = 0;

  MarginalSpec() = default;
  MarginalSpec(int d_, uint32_t beta_);

  int k() const { return popcount(beta); }
  std::size_t table_size() const { return std::size_t{1} << k(); }

  // Compact cell index of a full-domain index: bits of `index` at the set
  // positions of beta, packed MSB-first (PEXT).
  uint32_t cell_of(uint32_t index) const { return compact_bits(index, beta); }

  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
};

struct MarginalTable {
  MarginalSpec spec;
  std::vector<double> cells;  // 2^k compact-indexed masses

  MarginalTable() = default;
  explicit MarginalTable(const MarginalSpec& s)
      : spec(s), cells(s.table_size(), 0.0) {}
};

// Sparse set of Walsh coefficients of a distribution.  When normalized is
// true the values follow theta_a = 2^{-d/2} * sum_j (-1)^{popcount(a&j)} t[j].
struct HadamardCoeffs {
  int d = 0;
  bool normalized = true;
  std::map<uint32_t, double> entries;
};

// Exact k-way marginal of a full distribution (sums cells).  Serial
// reference; the parallel variant produces bit-identical output (each output
// cell is accumulated over ascending source index in both).
MarginalTable marginal_operator(const Distribution& t, const MarginalSpec& spec);
MarginalTable marginal_operator_parallel(const Distribution& t,
                                         const MarginalSpec& spec);

// Marginal of a marginal: sub.beta must be a subset of table.spec.beta.
MarginalTable marginalize_table(const MarginalTable& table,
                                const MarginalSpec& sub);

// (1/2) sum |a_i - b_i|; specs must match.
double total_variation(const MarginalTable& a, const MarginalTable& b);
double total_variation(std::span<const double> a, std::span<const double> b);

// Clip cells to [0,1] then renormalize to sum 1 (uniform if everything
// clipped to zero).  Used before the distributional analyses; estimators
// themselves never clip.
MarginalTable clip_renormalize(const MarginalTable& t);

}  // namespace ldpm
