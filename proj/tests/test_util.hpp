#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Shared helpers for the test binaries: a chi-square p-value oracle and a
// 256-bin uniformity check over ring elements. Kept independent of the
// library internals so statistical assertions do not lean on the code they
// check.

namespace testutil {

// Regularized upper incomplete gamma Q(a, x) via series / continued
// fraction (Numerical Recipes style).
inline double gamma_q(double a, double x) {
  auto gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a,x), return 1-P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - gln);
    return 1.0 - p;
  }
  // continued fraction for Q(a,x)
  double b = x + 1.0 - a, c = 1.0 / 1e-300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

// p-value of the chi-square statistic for `counts` against a uniform
// expectation.
inline double chi_square_uniform_p(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  double dof = static_cast<double>(counts.size() - 1);
  return gamma_q(dof / 2.0, stat / 2.0);
}

// Buckets each sample by its top byte within an ell-bit ring.
inline double uniformity_p_value(const std::vector<std::uint64_t>& samples,
                                 int ell) {
  std::vector<std::uint64_t> bins(256, 0);
  for (auto s : samples) bins[(s >> (ell - 8)) & 0xff]++;
  return chi_square_uniform_p(bins);
}

}  // namespace testutil
