#include "ldpm/core.hpp"

#include <cmath>
#include <stdexcept>

namespace ldpm {

void validate_dimension(int d) {
  if (d < 1 || d > kMaxDimensions) {
    throw std::invalid_argument("dimension must be in [1, " +
                                std::to_string(kMaxDimensions) + "]");
  }
}

Distribution::Distribution(int d_) : d(d_) {
  validate_dimension(d_);
  cells.assign(std::size_t{1} << d_, 0.0);
}

Distribution Distribution::uniform(int d) {
  Distribution t(d);
  double mass = 1.0 / static_cast<double>(t.size());
  for (auto& c : t.cells) c = mass;
  return t;
}

Distribution Distribution::point_mass(int d, uint32_t index) {
  Distribution t(d);
  if (index >= t.size()) throw std::invalid_argument("point mass out of range");
  t.cells[index] = 1.0;
  return t;
}

bool is_distribution(std::span<const double> cells, double tol) {
  double sum = 0.0;
  for (double c : cells) {
    if (!(c >= 0.0)) return false;  // also rejects NaN
    sum += c;
  }
  return std::abs(sum - 1.0) <= tol;
}

MarginalSpec::MarginalSpec(int d_, uint32_t beta_) : d(d_), beta(beta_) {
  validate_dimension(d_);
  if (beta_ == 0) throw std::invalid_argument("marginal mask must be nonzero");
  if (d_ < 32 && (beta_ >> d_) != 0) {
    throw std::invalid_argument("marginal mask exceeds dimension");
  }
}

MarginalTable marginal_operator(const Distribution& t,
                                const MarginalSpec& spec) {
  if (t.d != spec.d) throw std::invalid_argument("dimension mismatch");
  MarginalTable out(spec);
  for (uint32_t index = 0; index < t.size(); ++index) {
    out.cells[spec.cell_of(index)] += t.cells[index];
  }
  return out;
}

MarginalTable marginal_operator_parallel(const Distribution& t,
                                         const MarginalSpec& spec) {
  if (t.d != spec.d) throw std::invalid_argument("dimension mismatch");
  MarginalTable out(spec);
  const uint32_t hole_mask =
      static_cast<uint32_t>((std::size_t{1} << spec.d) - 1) & ~spec.beta;
  const std::size_t holes = std::size_t{1} << (spec.d - spec.k());
  const auto cells = static_cast<int64_t>(out.cells.size());
  // Each output cell sums its own slice in ascending source order, which is
  // the same per-cell addition order the serial sweep uses, so results match
  // bit for bit at any thread count.
#pragma omp parallel for schedule(static)
  for (int64_t cell = 0; cell < cells; ++cell) {
    const uint32_t base =
        expand_bits(static_cast<uint32_t>(cell), spec.beta);
    double sum = 0.0;
    for (std::size_t h = 0; h < holes; ++h) {
      sum += t.cells[base | expand_bits(static_cast<uint32_t>(h), hole_mask)];
    }
    out.cells[static_cast<std::size_t>(cell)] = sum;
  }
  return out;
}

MarginalTable marginalize_table(const MarginalTable& table,
                                const MarginalSpec& sub) {
  if (sub.d != table.spec.d) throw std::invalid_argument("dimension mismatch");
  if ((sub.beta & table.spec.beta) != sub.beta) {
    throw std::invalid_argument("submarginal attributes not covered by table");
  }
  MarginalTable out(sub);
  // Positions of sub's attributes inside the compact index of `table`.
  const uint32_t inner = compact_bits(sub.beta, table.spec.beta);
  for (uint32_t cell = 0; cell < table.cells.size(); ++cell) {
    out.cells[compact_bits(cell, inner)] += table.cells[cell];
  }
  return out;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

double total_variation(const MarginalTable& a, const MarginalTable& b) {
  if (!(a.spec == b.spec)) throw std::invalid_argument("marginal spec mismatch");
  return total_variation(std::span<const double>(a.cells),
                         std::span<const double>(b.cells));
}

MarginalTable clip_renormalize(const MarginalTable& t) {
  MarginalTable out = t;
  double sum = 0.0;
  for (auto& c : out.cells) {
    if (c < 0.0) c = 0.0;
    if (c > 1.0) c = 1.0;
    sum += c;
  }
  if (sum <= 0.0) {
    double mass = 1.0 / static_cast<double>(out.cells.size());
    for (auto& c : out.cells) c = mass;
  } else {
    for (auto& c : out.cells) c /= sum;
  }
  return out;
}

std::vector<uint32_t> kway_masks(int d, int k) {
  validate_dimension(d);
  if (k < 1 || k > d) throw std::invalid_argument("order must be in [1, d]");
  std::vector<uint32_t> masks;
  masks.reserve(binomial(d, k));
  const uint32_t limit = static_cast<uint32_t>((std::size_t{1} << d));
  uint32_t m = (1u << k) - 1;
  while (m < limit) {
    masks.push_back(m);
    // Gosper's hack: next integer with the same popcount.
    uint32_t c = m & (0u - m);
    uint32_t r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
  return masks;
}

}  // namespace ldpm
