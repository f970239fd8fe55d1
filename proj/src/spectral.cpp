#include "fdp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdp/error.hpp"

namespace fdp {

Shape shape_of(const std::vector<Axis>& axes) {
  Shape s;
  s.reserve(axes.size());
  for (const auto& a : axes) s.push_back(a.size);
  return s;
}

std::size_t num_points(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size;
  return n;
}

namespace {

void validate_axes(const std::vector<Axis>& axes) {
  if (axes.empty()) throw Error(ErrorKind::InvalidArgument, "grid needs at least one axis");
  for (const auto& a : axes) {
    if (a.size < 2) throw Error(ErrorKind::InvalidArgument, "grid axis needs N >= 2");
    if (!(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi))
      throw Error(ErrorKind::InvalidArgument, "grid axis needs finite bounds with hi > lo");
  }
}

std::vector<cplx> gather_channel(std::span<const cplx> data, std::size_t channels, std::size_t c) {
  std::vector<cplx> out(data.size() / channels);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data[i * channels + c];
  return out;
}

}  // namespace

GridFunction::GridFunction(std::vector<Axis> axes, std::size_t channels, std::vector<double> values)
    : axes_(std::move(axes)), channels_(channels), values_(std::move(values)) {
  validate_axes(axes_);
  if (channels_ == 0) throw Error(ErrorKind::InvalidArgument, "grid function needs >= 1 channel");
  if (values_.size() != fdp::num_points(axes_) * channels_)
    throw Error(ErrorKind::InvalidArgument, "value count does not match grid shape");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "grid function values must be finite");
}

GridFunction GridFunction::zeros(std::vector<Axis> axes, std::size_t channels) {
  const std::size_t n = fdp::num_points(axes) * channels;
  return GridFunction(std::move(axes), channels, std::vector<double>(n, 0.0));
}

GridFunction GridFunction::sample(std::vector<Axis> axes,
                                  const std::function<double(std::span<const double>)>& f) {
  validate_axes(axes);
  const std::size_t n = fdp::num_points(axes);
  std::vector<double> vals(n);
  GridFunction probe = zeros(axes, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = probe.coordinates(i);
    vals[i] = f(p);
  }
  return GridFunction(std::move(axes), 1, std::move(vals));
}

GridFunction GridFunction::sample_1d(const Axis& axis, const std::function<double(double)>& f) {
  std::vector<double> vals(axis.size);
  for (std::size_t i = 0; i < axis.size; ++i) vals[i] = f(axis.point(i));
  return GridFunction({axis}, 1, std::move(vals));
}

std::vector<double> GridFunction::coordinates(std::size_t point) const {
  std::vector<double> p(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const std::size_t i = point % axes_[a].size;
    point /= axes_[a].size;
    p[a] = axes_[a].point(i);
  }
  return p;
}

std::vector<double> GridFunction::channel(std::size_t c) const {
  std::vector<double> out(num_points());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * channels_ + c];
  return out;
}

bool GridFunction::same_grid(const GridFunction& other) const noexcept {
  return axes_ == other.axes_ && channels_ == other.channels_;
}

GridFunction GridFunction::with_values(std::vector<double> values) const {
  return GridFunction(axes_, channels_, std::move(values));
}

SpectralCoefficients::SpectralCoefficients(std::vector<Axis> axes, std::size_t channels,
                                           std::vector<cplx> coeffs)
    : axes_(std::move(axes)), channels_(channels), coeffs_(std::move(coeffs)) {
  validate_axes(axes_);
  if (channels_ == 0 || coeffs_.size() != fdp::num_points(axes_) * channels_)
    throw Error(ErrorKind::InvalidArgument, "coefficient count does not match grid shape");
}

double SpectralCoefficients::hermitian_residue() const {
  const Shape shape = this->shape();
  double worst = 0.0;
  const std::size_t n = num_frequencies();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t kc = conjugate_index(k, shape);
    for (std::size_t c = 0; c < channels_; ++c)
      worst = std::max(worst, std::abs(coeffs_[k * channels_ + c] - std::conj(coeffs_[kc * channels_ + c])));
  }
  return worst;
}

long signed_frequency(std::size_t pos, std::size_t n) noexcept {
  const std::size_t half_up = (n + 1) / 2;
  return pos < half_up ? static_cast<long>(pos) : static_cast<long>(pos) - static_cast<long>(n);
}

std::size_t frequency_position(long k, std::size_t n) noexcept {
  const long nn = static_cast<long>(n);
  return static_cast<std::size_t>(((k % nn) + nn) % nn);
}

std::size_t conjugate_index(std::size_t flat, const Shape& shape) {
  std::size_t out = 0;
  std::size_t stride = 1;
  for (std::size_t a = shape.size(); a-- > 0;) {
    const std::size_t n = shape[a];
    const std::size_t i = flat % n;
    flat /= n;
    out += ((n - i) % n) * stride;
    stride *= n;
  }
  return out;
}

std::vector<std::size_t> abs_frequencies(std::size_t flat, const Shape& shape) {
  std::vector<std::size_t> k(shape.size());
  for (std::size_t a = shape.size(); a-- > 0;) {
    const std::size_t n = shape[a];
    k[a] = static_cast<std::size_t>(std::labs(signed_frequency(flat % n, n)));
    flat /= n;
  }
  return k;
}

std::vector<cplx> to_spectrum(std::span<const double> values, const Shape& shape) {
  std::vector<cplx> out(values.begin(), values.end());
  fft_nd(out, shape, false);
  return out;
}

std::vector<double> to_values(std::vector<cplx> spectrum, const Shape& shape) {
  fft_nd(spectrum, shape, true);
  const double inv_n = 1.0 / static_cast<double>(spectrum.size());
  std::vector<double> out(spectrum.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real() * inv_n;
  return out;
}

double max_imag_residue(std::vector<cplx> spectrum, const Shape& shape) {
  fft_nd(spectrum, shape, true);
  const double inv_n = 1.0 / static_cast<double>(spectrum.size());
  double worst = 0.0;
  for (const auto& v : spectrum) worst = std::max(worst, std::abs(v.imag() * inv_n));
  return worst;
}

std::vector<cplx> hermitian_noise(const Shape& shape, Rng& rng) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t kc = conjugate_index(k, shape);
    if (kc == k) {
      out[k] = {rng.normal(), 0.0};
    } else if (k < kc) {
      out[k] = rng.complex_normal();
      out[kc] = std::conj(out[k]);
    }
  }
  return out;
}

SpectralCoefficients forward_transform(const GridFunction& f) {
  const Shape shape = f.shape();
  const std::size_t channels = f.channels();
  const std::size_t n = f.num_points();
  std::vector<cplx> coeffs(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto spec = to_spectrum(f.channel(c), shape);
    for (std::size_t k = 0; k < n; ++k) coeffs[k * channels + c] = spec[k];
  }
  return SpectralCoefficients(f.axes(), channels, std::move(coeffs));
}

GridFunction inverse_transform(const SpectralCoefficients& c) {
  double scale = 1.0;
  for (const auto& v : c.coeffs()) scale = std::max(scale, std::abs(v));
  const double residue = c.hermitian_residue();
  if (residue > kHermitianTolerance * scale)
    throw Error(ErrorKind::NonHermitianInput,
                "coefficients violate Hermitian symmetry (residue " + std::to_string(residue) + ")");
  const Shape shape = c.shape();
  const std::size_t channels = c.channels();
  const std::size_t n = c.num_frequencies();
  std::vector<double> values(n * channels);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const auto vals = to_values(gather_channel(c.coeffs(), channels, ch), shape);
    for (std::size_t i = 0; i < n; ++i) values[i * channels + ch] = vals[i];
  }
  return GridFunction(c.axes(), channels, std::move(values));
}

double evaluate_interpolant(const SpectralCoefficients& c, std::span<const double> point,
                            std::size_t channel) {
  const auto& axes = c.axes();
  if (point.size() != axes.size()) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  // Per-axis basis values phi_k(u) for each array position.
  std::vector<std::vector<cplx>> basis(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const std::size_t n = axes[a].size;
    const double u = (point[a] - axes[a].lo) / axes[a].length();
    basis[a].resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      const long k = signed_frequency(pos, n);
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) * u;
      if (n % 2 == 0 && k == -static_cast<long>(n / 2))
        basis[a][pos] = {std::cos(angle), 0.0};
      else
        basis[a][pos] = {std::cos(angle), std::sin(angle)};
    }
  }
  const std::size_t total = c.num_frequencies();
  const Shape shape = c.shape();
  double acc = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    cplx phi{1.0, 0.0};
    for (std::size_t a = axes.size(); a-- > 0;) {
      phi *= basis[a][rem % shape[a]];
      rem /= shape[a];
    }
    acc += (c.coeff(flat, channel) * phi).real();
  }
  return acc / static_cast<double>(total);
}

GridFunction resample(const GridFunction& f, const Shape& new_sizes) {
  if (new_sizes.size() != f.ndim()) throw Error(ErrorKind::InvalidArgument, "resample dimension mismatch");
  for (std::size_t a = 0; a < new_sizes.size(); ++a)
    if (new_sizes[a] < f.axes()[a].size)
      throw Error(ErrorKind::InvalidArgument, "resample target must not be coarser than the source");
  const Shape old_shape = f.shape();
  std::vector<Axis> new_axes = f.axes();
  for (std::size_t a = 0; a < new_axes.size(); ++a) new_axes[a].size = new_sizes[a];
  const std::size_t n_old = f.num_points();
  const std::size_t n_new = fdp::num_points(new_axes);
  const double gain = static_cast<double>(n_new) / static_cast<double>(n_old);
  const std::size_t channels = f.channels();
  std::vector<double> out(n_new * channels);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const auto spec = to_spectrum(f.channel(ch), old_shape);
    std::vector<cplx> padded(n_new, cplx{});
    for (std::size_t flat = 0; flat < n_old; ++flat) {
      // Map each old frequency to its slot in the larger grid; an even-N
      // Nyquist entry is split evenly between +N/2 and -N/2.
      std::vector<std::pair<std::size_t, double>> targets{{0, 1.0}};
      std::size_t rem = flat;
      std::size_t stride_new = 1;
      for (std::size_t a = old_shape.size(); a-- > 0;) {
        const std::size_t n = old_shape[a];
        const std::size_t m = new_sizes[a];
        const long k = signed_frequency(rem % n, n);
        rem /= n;
        std::vector<std::pair<std::size_t, double>> next;
        const bool nyquist = (n % 2 == 0) && k == -static_cast<long>(n / 2) && m > n;
        for (auto [idx, w] : targets) {
          if (nyquist) {
            next.emplace_back(idx + frequency_position(k, m) * stride_new, 0.5 * w);
            next.emplace_back(idx + frequency_position(-k, m) * stride_new, 0.5 * w);
          } else {
            next.emplace_back(idx + frequency_position(k, m) * stride_new, w);
          }
        }
        targets = std::move(next);
        stride_new *= m;
      }
      for (auto [idx, w] : targets) padded[idx] += spec[flat] * (w * gain);
    }
    const auto vals = to_values(std::move(padded), new_sizes);
    for (std::size_t i = 0; i < n_new; ++i) out[i * channels + ch] = vals[i];
  }
  return GridFunction(std::move(new_axes), channels, std::move(out));
}

}  // namespace fdp
