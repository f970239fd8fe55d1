#include "fdp/fft.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

#include "fdp/error.hpp"

namespace fdp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void make_radix2_tables(std::size_t n, std::vector<cplx>& tw, std::vector<std::size_t>& rev) {
  tw.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(a), std::sin(a)};
  }
  rev.assign(n, 0);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    rev[i] = r;
  }
}

void radix2_pass(std::span<cplx> a, const std::vector<cplx>& tw, const std::vector<std::size_t>& rev) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    if (i < rev[i]) std::swap(a[i], a[rev[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const cplx u = a[start + j];
        const cplx v = a[start + j + half] * tw[j * stride];
        a[start + j] = u + v;
        a[start + j + half] = u - v;
      }
    }
  }
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "transform length must be positive");
  if (pow2_) {
    make_radix2_tables(n, twiddle_, bitrev_);
    return;
  }
  m_ = 1;
  while (m_ < 2 * n - 1) m_ <<= 1;
  make_radix2_tables(m_, inner_twiddle_, inner_bitrev_);
  chirp_.resize(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small.
    const std::size_t k2 = (k * k) % two_n;
    const double a = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = {std::cos(a), -std::sin(a)};
  }
  kernel_hat_.assign(m_, cplx{});
  kernel_hat_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    kernel_hat_[k] = std::conj(chirp_[k]);
    kernel_hat_[m_ - k] = std::conj(chirp_[k]);
  }
  radix2_pass(kernel_hat_, inner_twiddle_, inner_bitrev_);
}

void FftPlan::radix2(std::span<cplx> data) const { radix2_pass(data, twiddle_, bitrev_); }

void FftPlan::bluestein(std::span<cplx> data) const {
  std::vector<cplx> work(m_, cplx{});
  for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
  radix2_pass(work, inner_twiddle_, inner_bitrev_);
  for (std::size_t k = 0; k < m_; ++k) work[k] = std::conj(work[k] * kernel_hat_[k]);
  // Inverse via conjugation: ifft(x) = conj(fft(conj(x))) / m.
  radix2_pass(work, inner_twiddle_, inner_bitrev_);
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(work[k]) * inv_m * chirp_[k];
}

void FftPlan::forward(std::span<cplx> data) const {
  if (data.size() != n_) throw Error(ErrorKind::InvalidArgument, "transform length mismatch");
  if (n_ == 1) return;
  if (pow2_)
    radix2(data);
  else
    bluestein(data);
}

void FftPlan::backward(std::span<cplx> data) const {
  for (auto& v : data) v = std::conj(v);
  forward(data);
  for (auto& v : data) v = std::conj(v);
}

const FftPlan& fft_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  return *it->second;
}

void fft_nd(std::span<cplx> data, std::span<const std::size_t> shape, bool backward) {
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  if (total != data.size()) throw Error(ErrorKind::InvalidArgument, "shape does not match data size");
  std::size_t inner = total;
  std::vector<cplx> line;
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    const std::size_t n = shape[axis];
    inner /= n;
    const std::size_t outer = total / (inner * n);
    const FftPlan& plan = fft_plan(n);
    line.resize(n);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        if (inner == 1) {
          std::span<cplx> seg(data.data() + base, n);
          backward ? plan.backward(seg) : plan.forward(seg);
          continue;
        }
        for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * inner];
        backward ? plan.backward(line) : plan.forward(line);
        for (std::size_t i = 0; i < n; ++i) data[base + i * inner] = line[i];
      }
    }
  }
}

std::vector<cplx> dft_direct(std::span<const cplx> data, bool backward) {
  const std::size_t n = data.size();
  const double sign = backward ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ki = (k * i) % n;
      const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(ki) / static_cast<double>(n);
      acc += data[i] * cplx{std::cos(a), std::sin(a)};
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace fdp
