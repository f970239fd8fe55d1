#pragma once

// Reference implementations used only by tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fdp/spectral.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Direct O(N^2) DFT, exp(-j 2pi k i / N).
inline std::vector<cplx> dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * cplx(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

/// Direct inverse, N^-1 sum_k c_k exp(+j 2pi k i / N), real part.
inline std::vector<double> idft(const std::vector<cplx>& c) {
  const std::size_t n = c.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += c[k] * cplx(std::cos(a), std::sin(a));
    }
    out[i] = acc.real() / static_cast<double>(n);
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
