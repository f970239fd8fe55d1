#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fdp {

using cplx = std::complex<double>;

/**
 * @brief Precomputed 1D transform of a fixed length.
 *
 * Power-of-two lengths use an iterative radix-2 Cooley-Tukey pass; every
 * other length goes through Bluestein's chirp-z convolution on a power-of-two
 * grid, so all lengths are O(N log N). Both directions are unnormalized:
 * forward uses exp(-j2pi k i/N), backward exp(+j2pi k i/N).
 */
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;

 private:
  void radix2(std::span<cplx> data) const;
  void bluestein(std::span<cplx> data) const;

  std::size_t n_ = 0;
  bool pow2_ = true;
  std::vector<cplx> twiddle_;
  std::vector<std::size_t> bitrev_;
  // Bluestein state.
  std::size_t m_ = 0;
  std::vector<cplx> chirp_;
  std::vector<cplx> kernel_hat_;
  std::vector<cplx> inner_twiddle_;
  std::vector<std::size_t> inner_bitrev_;
};

/// Plan lookup; plans are cached per thread.
const FftPlan& fft_plan(std::size_t n);

/// Unnormalized separable transform of a row-major array with the given shape.
void fft_nd(std::span<cplx> data, std::span<const std::size_t> shape, bool backward);

/// O(N^2) direct summation; reference for tests and tiny sizes.
std::vector<cplx> dft_direct(std::span<const cplx> data, bool backward);

}  // namespace fdp
