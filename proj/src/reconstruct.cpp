#include "fdp/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "fdp/error.hpp"

namespace fdp {

double nyquist(const GridFunction& f) {
  std::size_t n = f.axes().front().size;
  for (const auto& a : f.axes()) n = std::min(n, a.size);
  return static_cast<double>(n / 2);
}

GridFunction bandlimit(const GridFunction& f, double nu) {
  if (!(nu >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff must be non-negative");
  if (nu > nyquist(f))
    throw Error(ErrorKind::CutoffAboveNyquist,
                "cutoff " + std::to_string(nu) + " exceeds the grid Nyquist " + std::to_string(nyquist(f)));
  const Shape shape = f.shape();
  const std::size_t n = f.num_points();
  std::vector<char> keep(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto ak = abs_frequencies(k, shape);
    keep[k] = std::all_of(ak.begin(), ak.end(), [nu](std::size_t a) { return static_cast<double>(a) <= nu; });
  }
  const std::size_t channels = f.channels();
  std::vector<double> out(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    auto spec = to_spectrum(f.channel(c), shape);
    for (std::size_t k = 0; k < n; ++k)
      if (!keep[k]) spec[k] = 0.0;
    const auto v = to_values(std::move(spec), shape);
    for (std::size_t i = 0; i < n; ++i) out[i * channels + c] = v[i];
  }
  return f.with_values(std::move(out));
}

std::vector<double> reconstruct_from_samples(const GridFunction& samples, double nu,
                                             std::span<const std::vector<double>> points, std::size_t channel) {
  const SpectralCoefficients c = forward_transform(bandlimit(samples, nu));
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(evaluate_interpolant(c, p, channel));
  return out;
}

double l2_norm(const GridFunction& f) {
  double cell = 1.0;
  for (const auto& a : f.axes()) cell *= a.spacing();
  double sq = 0.0;
  for (double v : f.values()) sq += v * v;
  return std::sqrt(cell * sq);
}

namespace {

GridFunction restrict_to(const GridFunction& dense, const Shape& grid) {
  const Shape ds = dense.shape();
  std::vector<Axis> axes = dense.axes();
  for (std::size_t a = 0; a < axes.size(); ++a) axes[a].size = grid[a];
  const std::size_t n = num_points(axes);
  const std::size_t ch = dense.channels();
  std::vector<double> v(n * ch);
  for (std::size_t i = 0; i < n; ++i) {
    // Row-major unravel on the coarse grid, ravel on the dense grid with stride M/N.
    std::size_t rem = i, flat = 0, mult = 1;
    std::vector<std::size_t> idx(grid.size());
    for (std::size_t a = grid.size(); a-- > 0;) {
      idx[a] = rem % grid[a];
      rem /= grid[a];
    }
    for (std::size_t a = grid.size(); a-- > 0;) {
      flat += idx[a] * (ds[a] / grid[a]) * mult;
      mult *= ds[a];
    }
    for (std::size_t c = 0; c < ch; ++c) v[i * ch + c] = dense.value(flat, c);
  }
  return GridFunction(std::move(axes), ch, std::move(v));
}

GridFunction difference(const GridFunction& a, const GridFunction& b) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.values()[i];
  return a.with_values(std::move(v));
}

}  // namespace

ErrorDecomposition error_decomposition(const GridFunction& reference, const Shape& grid, double nu) {
  const Shape ds = reference.shape();
  if (grid.size() != ds.size()) throw Error(ErrorKind::InvalidArgument, "grid rank does not match the reference");
  for (std::size_t a = 0; a < ds.size(); ++a)
    if (grid[a] < 2 || ds[a] < 8 * grid[a] || ds[a] % grid[a] != 0)
      throw Error(ErrorKind::ReferenceTooCoarse, "reference axis of " + std::to_string(ds[a]) +
                                                     " points must be a multiple of, and >= 8x, the grid's " +
                                                     std::to_string(grid[a]));
  const GridFunction& x = reference;
  const GridFunction x_nu = bandlimit(x, nu);
  auto interp = [&](const GridFunction& dense) { return resample(restrict_to(dense, grid), ds); };
  ErrorDecomposition e;
  e.eps1 = l2_norm(interp(difference(x, x_nu)));
  e.eps2 = l2_norm(difference(interp(x_nu), x_nu));
  e.eps3 = l2_norm(difference(x_nu, x));
  e.total = l2_norm(difference(interp(x), x));
  e.bound_holds = e.total <= e.eps1 + e.eps2 + e.eps3 + 1e-9 * std::max(1.0, l2_norm(x));
  return e;
}

GridFunction super_resolve(const InrNetwork& net, const GridFunction& sample, const Shape& target, double t) {
  if (target == sample.shape()) return denoise(net, sample, t);
  return denoise_at(net, sample, t, target);
}

}  // namespace fdp
