#include "fdp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "fdp/error.hpp"
#include "fdp/parallel.hpp"

namespace fdp {

using ad::Matrix;
using ad::Var;

const char* weighting_name(LossWeighting w) {
  switch (w) {
    case LossWeighting::Elbo: return "elbo";
    case LossWeighting::Simple: return "simple";
    case LossWeighting::Denoiser: return "denoiser";
    case LossWeighting::MinSnr: return "min-snr";
  }
  return "?";
}

LossWeighting parse_weighting(const std::string& name) {
  if (name == "elbo") return LossWeighting::Elbo;
  if (name == "simple") return LossWeighting::Simple;
  if (name == "denoiser") return LossWeighting::Denoiser;
  if (name == "min-snr") return LossWeighting::MinSnr;
  throw Error(ErrorKind::Config, "unknown loss weighting '" + name + "' (expected elbo, simple, denoiser or min-snr)");
}

std::vector<double> loss_weights(const DiffusionProcess& process, const SpectralWeights& sw, double t,
                                 LossWeighting weighting) {
  const std::size_t n = sw.b.size();
  if (weighting == LossWeighting::Denoiser) return std::vector<double>(n, 1.0);
  const auto kern = process.kernel(sw, t);
  double lambda = 1.0;
  if (weighting == LossWeighting::Simple)
    lambda = std::accumulate(kern.variance.begin(), kern.variance.end(), 0.0) / static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = kern.variance[k];
    if (!(s > 0.0)) throw Error(ErrorKind::SingularKernel, "kernel variance vanishes at t = " + std::to_string(t));
    const double g = kern.decay[k] / s;
    w[k] = weighting == LossWeighting::MinSnr ? std::min(kern.decay[k] * g, min_snr_gamma) : lambda * g * g / sw.r[k];
  }
  return w;
}

LossSample elbo_loss_with_noise(const GridFunction& x0, double t, std::vector<std::vector<cplx>> noise,
                                const Denoiser& denoise, const DiffusionProcess& process, LossWeighting weighting) {
  const Shape shape = x0.shape();
  const auto w = loss_weights(process, process.weights(shape), t, weighting);
  LossSample out{x0, t, std::move(noise), x0, x0, 0.0, {}};
  out.x_t = process.forward_sample_with_noise(x0, t, out.noise);
  out.denoised = denoise(out.x_t, t);
  if (!out.denoised.same_grid(x0)) throw Error(ErrorKind::InvalidArgument, "denoiser changed the grid");
  const std::size_t n = x0.num_points();
  out.per_frequency.assign(n, 0.0);
  for (std::size_t c = 0; c < x0.channels(); ++c) {
    const auto fd = to_spectrum(out.denoised.channel(c), shape);
    const auto f0 = to_spectrum(x0.channel(c), shape);
    for (std::size_t k = 0; k < n; ++k) out.per_frequency[k] += w[k] * std::norm(fd[k] - f0[k]) / static_cast<double>(n);
  }
  out.loss = std::accumulate(out.per_frequency.begin(), out.per_frequency.end(), 0.0);
  return out;
}

LossSample elbo_loss(const GridFunction& x0, double t, const Denoiser& denoise, const DiffusionProcess& process,
                     Rng& rng, LossWeighting weighting) {
  process.check_time(t);
  std::vector<std::vector<cplx>> noise;
  for (std::size_t c = 0; c < x0.channels(); ++c) noise.push_back(hermitian_noise(x0.shape(), rng));
  return elbo_loss_with_noise(x0, t, std::move(noise), denoise, process, weighting);
}

ElementDraw draw_element(const GridFunction& x0, const DiffusionProcess& process, const ObjectiveConfig& cfg,
                         std::uint64_t seed, std::uint64_t step, std::uint64_t element) {
  Rng rng(seed, step, element);
  ElementDraw d;
  const double t_max = cfg.t_max > 0.0 ? std::min(cfg.t_max, process.horizon()) : process.horizon();
  if (!(cfg.t_min > 0.0 && cfg.t_min <= t_max))
    throw Error(ErrorKind::InvalidTime, "training times need 0 < t_min <= t_max <= T");
  d.t = rng.uniform(cfg.t_min, t_max);
  for (std::size_t c = 0; c < x0.channels(); ++c) d.noise.push_back(hermitian_noise(x0.shape(), rng));
  return d;
}

Var element_loss(const InrArchitecture& arch, std::span<const Var> params, const GridFunction& x0,
                 const ElementDraw& draw, const DiffusionProcess& process, LossWeighting weighting) {
  const GridFunction x_t = process.forward_sample_with_noise(x0, draw.t, draw.noise);
  const Matrix noisy = grid_values(x_t);
  const Var inputs = ad::constant(build_inputs(arch, grid_coords(x_t), noisy, draw.t));
  const auto psi = inner_loop(arch, params, inputs, ad::constant(noisy));
  const Var out = forward(arch, params, psi, inputs);
  const Var residual = ad::sub(out, ad::constant(grid_values(x0)));
  if (weighting == LossWeighting::Denoiser) return ad::sum(ad::square(residual));
  const Shape shape = x0.shape();
  auto w = std::make_shared<const std::vector<double>>(loss_weights(process, process.weights(shape), draw.t, weighting));
  // sum_i R_i (I w F R)_i = N^-1 sum_k w_k |F R_k|^2 (Parseval).
  return ad::sum(ad::mul(residual, ad::spectral_filter(residual, w, std::make_shared<const Shape>(shape))));
}

BatchLoss batch_loss(const std::vector<GridFunction>& batch, const InrNetwork& net, const DiffusionProcess& process,
                     const ObjectiveConfig& cfg, std::uint64_t seed, std::uint64_t step, bool with_gradient) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "batch_loss needs at least one sample");
  const std::size_t b = batch.size();
  BatchLoss out;
  out.element_loss.assign(b, 0.0);
  out.element_t.assign(b, 0.0);
  std::vector<std::vector<Matrix>> grads(with_gradient ? b : 0);
  InrArchitecture arch = net.architecture();
  if (!with_gradient) arch.first_order = true;

  parallel_for(b, [&](std::size_t i) {
    const ElementDraw draw = draw_element(batch[i], process, cfg, seed, step, i);
    std::vector<Var> params;
    for (const auto& p : net.parameters()) params.push_back(with_gradient ? ad::parameter(p) : ad::constant(p));
    const Var loss = element_loss(arch, params, batch[i], draw, process, cfg.weighting);
    out.element_loss[i] = loss.scalar();
    out.element_t[i] = draw.t;
    if (with_gradient) grads[i] = ad::grad_values(loss, params);
  });

  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) out.loss += out.element_loss[i];
  out.loss *= inv_b;
  if (with_gradient) {
    out.gradient = std::move(grads[0]);
    for (std::size_t i = 1; i < b; ++i)
      for (std::size_t j = 0; j < out.gradient.size(); ++j) out.gradient[j] += grads[i][j];
    for (auto& g : out.gradient) g *= inv_b;
  }
  return out;
}

std::vector<double> fit_linear_score(const DiffusionProcess& process, const GaussianPrior& prior, double t,
                                     std::size_t n, Rng& rng) {
  const Shape shape = shape_of(prior.axes);
  const auto kern = process.kernel(shape, t);
  const std::size_t m = prior.mean.size();
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  std::vector<double> num(m, 0.0), den(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e0 = hermitian_noise(shape, rng);
    const auto e1 = hermitian_noise(shape, rng);
    for (std::size_t k = 0; k < m; ++k) {
      const double s = kern.variance[k];
      if (!(s > 0.0)) throw Error(ErrorKind::SingularKernel, "kernel variance vanishes at t = " + std::to_string(t));
      const cplx f0 = prior.mean[k] + std::sqrt(prior.variance[k]) * sqrt_m * e0[k];
      const cplx xt = kern.decay[k] * f0 + std::sqrt(s) * sqrt_m * e1[k];
      const cplx target = -(xt - kern.decay[k] * f0) / s;
      num[k] += std::real(std::conj(xt) * target);
      den[k] += std::norm(xt);
    }
  }
  std::vector<double> theta(m);
  for (std::size_t k = 0; k < m; ++k) theta[k] = num[k] / den[k];
  return theta;
}

}  // namespace fdp
