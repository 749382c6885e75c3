#include "ldpm/hadamard.hpp"

#include <cmath>
#include <stdexcept>

namespace ldpm {

void fwht_serial(std::span<double> v) {
  const std::size_t n = v.size();
  log2_exact(n);
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t base = 0; base < n; base += (len << 1)) {
      for (std::size_t off = 0; off < len; ++off) {
        const double a = v[base + off];
        const double b = v[base + off + len];
        v[base + off] = a + b;
        v[base + off + len] = a - b;
      }
    }
  }
}

void fwht_parallel(std::span<double> v) {
  const std::size_t n = v.size();
  log2_exact(n);
  const auto half = static_cast<int64_t>(n >> 1);
  for (std::size_t len = 1; len < n; len <<= 1) {
    // One butterfly per pair index; pairs are disjoint, and each performs
    // exactly the operations of the serial stage, so output is bit-identical.
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < half; ++p) {
      const std::size_t u = static_cast<std::size_t>(p);
      const std::size_t base = (u / len) * (len << 1);
      const std::size_t i = base + (u % len);
      const std::size_t j = i + len;
      const double a = v[i];
      const double b = v[j];
      v[i] = a + b;
      v[j] = a - b;
    }
  }
}

std::vector<double> hadamard_transform(std::vector<double> v) {
  const int d = log2_exact(v.size());
  fwht_serial(v);
  const double scale = std::pow(2.0, -0.5 * d);
  for (auto& x : v) x *= scale;
  return v;
}

HadamardCoeffs low_order_coefficients(const Distribution& t, int k) {
  if (k < 0 || k > t.d) throw std::invalid_argument("order must be in [0, d]");
  std::vector<double> spectrum(t.cells.begin(), t.cells.end());
  fwht_serial(spectrum);
  const double scale = std::pow(2.0, -0.5 * t.d);
  HadamardCoeffs coeffs;
  coeffs.d = t.d;
  coeffs.normalized = true;
  for (uint32_t a = 0; a < spectrum.size(); ++a) {
    if (popcount(a) <= k) coeffs.entries[a] = spectrum[a] * scale;
  }
  return coeffs;
}

std::vector<uint32_t> required_coefficients(int d, int k) {
  validate_dimension(d);
  if (k < 1 || k > d) throw std::invalid_argument("order must be in [1, d]");
  std::vector<uint32_t> out;
  uint64_t total = 0;
  for (int l = 1; l <= k; ++l) total += binomial(d, l);
  out.reserve(total);
  const uint32_t limit = static_cast<uint32_t>(std::size_t{1} << d);
  for (uint32_t a = 1; a < limit; ++a) {
    if (popcount(a) <= k) out.push_back(a);
  }
  return out;
}

MarginalTable marginal_from_coefficients(const HadamardCoeffs& coeffs,
                                         const MarginalSpec& spec) {
  if (coeffs.d != spec.d) throw std::invalid_argument("dimension mismatch");
  const int d = spec.d;
  const int k = spec.k();
  const double norm = coeffs.normalized ? 1.0 : std::pow(2.0, -0.5 * d);

  // Gather theta_a for every a inside beta into the compact k-bit layout.
  std::vector<double> packed(spec.table_size(), 0.0);
  for (uint32_t c = 0; c < packed.size(); ++c) {
    const uint32_t a = expand_bits(c, spec.beta);
    auto it = coeffs.entries.find(a);
    if (it == coeffs.entries.end()) {
      throw std::runtime_error("missing coefficient for marginal");
    }
    packed[c] = it->second * norm;
  }

  // For a within beta, summing the basis sign over one marginal cell leaves
  // 2^{d-k} * 2^{-d/2} * (-1)^{popcount(a & expanded cell)}, and that sign
  // equals the compact-index sign, so the cell values are the unnormalized
  // size-2^k transform of the packed coefficients scaled by 2^{d/2-k}.
  fwht_serial(packed);
  const double scale = std::pow(2.0, 0.5 * d - k);
  MarginalTable out(spec);
  for (std::size_t i = 0; i < packed.size(); ++i) out.cells[i] = packed[i] * scale;
  return out;
}

}  // namespace ldpm
