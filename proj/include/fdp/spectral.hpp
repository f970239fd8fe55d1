#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fdp/fft.hpp"
#include "fdp/rng.hpp"

namespace fdp {

/// One periodic axis: `size` samples at lo + i (hi - lo) / size.
struct Axis {
  std::size_t size = 0;
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  double spacing() const noexcept { return (hi - lo) / static_cast<double>(size); }
  double point(std::size_t i) const noexcept { return lo + static_cast<double>(i) * spacing(); }
  bool operator==(const Axis&) const = default;
};

using Shape = std::vector<std::size_t>;

Shape shape_of(const std::vector<Axis>& axes);
std::size_t num_points(const std::vector<Axis>& axes);

/**
 * @brief Samples of a (possibly multi-channel) function on a uniform periodic grid.
 *
 * Values are stored row-major over the axes with the channel index fastest,
 * which is also the on-disk order. Construction validates N >= 2 per axis and
 * finiteness of every value; instances are immutable afterwards.
 */
class GridFunction {
 public:
  GridFunction(std::vector<Axis> axes, std::size_t channels, std::vector<double> values);

  static GridFunction zeros(std::vector<Axis> axes, std::size_t channels = 1);
  /// Samples f at every grid point of a single-channel function.
  static GridFunction sample(std::vector<Axis> axes,
                             const std::function<double(std::span<const double>)>& f);
  static GridFunction sample_1d(const Axis& axis, const std::function<double(double)>& f);

  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t ndim() const noexcept { return axes_.size(); }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t num_points() const noexcept { return values_.size() / channels_; }
  Shape shape() const { return shape_of(axes_); }
  std::span<const double> values() const noexcept { return values_; }
  double value(std::size_t point, std::size_t channel = 0) const { return values_[point * channels_ + channel]; }

  std::vector<double> coordinates(std::size_t point) const;
  std::vector<double> channel(std::size_t c) const;
  bool same_grid(const GridFunction& other) const noexcept;
  GridFunction with_values(std::vector<double> values) const;

 private:
  std::vector<Axis> axes_;
  std::size_t channels_ = 1;
  std::vector<double> values_;
};

/**
 * @brief Unnormalized DFT coefficients of a GridFunction, same layout (channel fastest).
 *
 * coeffs[k] = sum_i values[i] exp(-j 2pi k i / N), per axis.
 */
class SpectralCoefficients {
 public:
  SpectralCoefficients(std::vector<Axis> axes, std::size_t channels, std::vector<cplx> coeffs);

  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t num_frequencies() const noexcept { return coeffs_.size() / channels_; }
  Shape shape() const { return shape_of(axes_); }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  cplx coeff(std::size_t freq, std::size_t channel = 0) const { return coeffs_[freq * channels_ + channel]; }

  /// max_k |c[k] - conj(c[-k])|.
  double hermitian_residue() const;

 private:
  std::vector<Axis> axes_;
  std::size_t channels_ = 1;
  std::vector<cplx> coeffs_;
};

// Frequency indexing. Array position <-> signed frequency in
// {-floor(N/2), ..., ceil(N/2) - 1}, standard DFT layout.
long signed_frequency(std::size_t pos, std::size_t n) noexcept;
std::size_t frequency_position(long k, std::size_t n) noexcept;
/// Flat index of the frequency conjugate to `flat` (-k on every axis).
std::size_t conjugate_index(std::size_t flat, const Shape& shape);
/// Per-axis |k| of a flat frequency index.
std::vector<std::size_t> abs_frequencies(std::size_t flat, const Shape& shape);

SpectralCoefficients forward_transform(const GridFunction& f);

/// Tolerance on the Hermitian residue accepted by inverse_transform, relative to max(1, max|c|).
inline constexpr double kHermitianTolerance = 1e-8;

/// Real inverse with 1/N normalization; throws NonHermitianInput when the
/// coefficients do not describe a real function.
GridFunction inverse_transform(const SpectralCoefficients& c);

/**
 * @brief Evaluates the trigonometric interpolant sum_i x[p_i] xi^i at an arbitrary point.
 *
 * The even-N Nyquist term is split symmetrically (a cosine), which makes the
 * interpolant real and agree with the samples on the grid. Points outside
 * the domain wrap periodically.
 */
double evaluate_interpolant(const SpectralCoefficients& c, std::span<const double> point,
                            std::size_t channel = 0);

/// Trigonometric interpolant of f evaluated on a finer grid with the given per-axis sizes (>= original).
GridFunction resample(const GridFunction& f, const Shape& new_sizes);

// Single-channel raw helpers used by the process, score and sampler code.
std::vector<cplx> to_spectrum(std::span<const double> values, const Shape& shape);
/// Inverse transform keeping only the real part; no symmetry check.
std::vector<double> to_values(std::vector<cplx> spectrum, const Shape& shape);
double max_imag_residue(std::vector<cplx> spectrum, const Shape& shape);

/// Complex Gaussian spectrum with E|e_k|^2 = 1 and e_{-k} = conj(e_k); self-conjugate entries are real N(0,1).
std::vector<cplx> hermitian_noise(const Shape& shape, Rng& rng);

}  // namespace fdp
