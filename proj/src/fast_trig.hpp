#pragma once

#include <cmath>
#include <cstddef>

namespace fdp::detail {

// Branch-free sin/cos for dense arrays; auto-vectorizes. Three-part
// Cody-Waite reduction by pi/2 followed by Taylor polynomials on [-pi/4, pi/4]
// (truncation error < 1e-17). Arguments beyond kMaxArg fall back to std::sin.
inline constexpr double kMaxArg = 1e5;

// Writes sin(x) to s_out and cos(x) to c_out; either may be null.
inline void sincos_kernel(const double* x, double* s_out, double* c_out, std::size_t n) {
  constexpr double kTwoOverPi = 0.63661977236758134308;
  constexpr double kPio2A = 1.5707963267341256e+00;
  constexpr double kPio2B = 6.0771005065061922e-11;
  constexpr double kPio2C = 2.0222662487959506e-21;
  double dummy = 0.0;
  const std::size_t s_step = s_out ? 1 : 0;
  const std::size_t c_step = c_out ? 1 : 0;
  if (!s_out) s_out = &dummy;
  if (!c_out) c_out = &dummy;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    // Round-to-nearest via the 1.5 * 2^52 trick (valid for |v * 2/pi| < 2^51).
    const double q = (v * kTwoOverPi + 0x1.8p52) - 0x1.8p52;
    const double r = ((v - q * kPio2A) - q * kPio2B) - q * kPio2C;
    const double r2 = r * r;
    const double s =
        r * (1.0 + r2 * (-1.0 / 6 + r2 * (1.0 / 120 + r2 * (-1.0 / 5040 + r2 * (1.0 / 362880 +
             r2 * (-1.0 / 39916800 + r2 * (1.0 / 6227020800.0 + r2 * (-1.0 / 1307674368000.0))))))));
    const double c =
        1.0 + r2 * (-0.5 + r2 * (1.0 / 24 + r2 * (-1.0 / 720 + r2 * (1.0 / 40320 + r2 * (-1.0 / 3628800 +
              r2 * (1.0 / 479001600.0 + r2 * (-1.0 / 87178291200.0 + r2 * (1.0 / 20922789888000.0))))))));
    const double quadrant = q - 4.0 * std::floor(q * 0.25);
    const double upper = std::floor(quadrant * 0.5);
    const double odd = quadrant - 2.0 * upper;
    const double sign = 1.0 - 2.0 * upper;
    // sin(r + q pi/2) and cos(r + q pi/2) = sin(r + (q + 1) pi/2).
    const double sv = sign * (s + odd * (c - s));
    const double cv = sign * (c - odd * (c + s));
    s_out[i * s_step] = sv;
    c_out[i * c_step] = cv;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(x[i]) <= kMaxArg) continue;
    if (s_step) s_out[i] = std::sin(x[i]);
    if (c_step) c_out[i] = std::cos(x[i]);
  }
}

}  // namespace fdp::detail
