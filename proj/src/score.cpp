#include "fdp/score.hpp"

#include <algorithm>
#include <cmath>

#include "fdp/error.hpp"

namespace fdp {

namespace {

void require_positive(const std::vector<double>& v, double t) {
  for (double s : v)
    if (!(s > 0.0))
      throw Error(ErrorKind::SingularKernel, "kernel variance vanishes at t = " + std::to_string(t));
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!a.same_grid(b)) throw Error(ErrorKind::InvalidArgument, "score inputs live on different grids");
}

// Applies `op(k, fx, fy)` per frequency and channel, then inverse transforms.
template <typename Op>
GridFunction combine(const GridFunction& x, const GridFunction& y, Op op) {
  const Shape shape = x.shape();
  const std::size_t n = x.num_points();
  const std::size_t channels = x.channels();
  std::vector<double> out(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto fx = to_spectrum(x.channel(c), shape);
    const auto fy = to_spectrum(y.channel(c), shape);
    std::vector<cplx> res(n);
    for (std::size_t k = 0; k < n; ++k) res[k] = op(k, fx[k], fy[k]);
    const auto vals = to_values(std::move(res), shape);
    for (std::size_t i = 0; i < n; ++i) out[i * channels + c] = vals[i];
  }
  return x.with_values(std::move(out));
}

}  // namespace

GaussianPrior GaussianPrior::zero_mean(std::vector<Axis> axes, std::vector<double> variance) {
  GaussianPrior p;
  const std::size_t n = num_points(axes);
  if (variance.size() != n) throw Error(ErrorKind::InvalidArgument, "prior variance must cover every frequency");
  p.axes = std::move(axes);
  p.mean.assign(n, cplx{});
  p.variance = std::move(variance);
  return p;
}

GridFunction GaussianPrior::sample(Rng& rng) const {
  const Shape shape = shape_of(axes);
  const double sqrt_n = std::sqrt(static_cast<double>(mean.size()));
  auto eps = hermitian_noise(shape, rng);
  for (std::size_t k = 0; k < eps.size(); ++k) eps[k] = mean[k] + std::sqrt(variance[k]) * sqrt_n * eps[k];
  return GridFunction(axes, 1, to_values(std::move(eps), shape));
}

GridFunction GaussianMixturePrior::sample(Rng& rng) const {
  if (components.empty() || components.size() != weights.size())
    throw Error(ErrorKind::InvalidArgument, "mixture needs one weight per component");
  double u = rng.uniform();
  std::size_t c = 0;
  while (c + 1 < components.size() && u >= weights[c]) u -= weights[c++];
  return components[c].sample(rng);
}

GridFunction mixture_posterior_mean(const GridFunction& x, double t, const DiffusionProcess& process,
                                    const GaussianMixturePrior& prior) {
  if (prior.components.empty() || prior.components.size() != prior.weights.size())
    throw Error(ErrorKind::InvalidArgument, "mixture needs one weight per component");
  if (x.channels() != 1 || x.axes() != prior.components.front().axes)
    throw Error(ErrorKind::InvalidArgument, "prior grid does not match the state");
  const Shape shape = x.shape();
  const std::size_t n = x.num_points();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto kern = process.kernel(shape, t);
  const auto fx = to_spectrum(x.values(), shape);
  std::vector<double> log_w;
  std::vector<std::vector<cplx>> post;
  for (std::size_t c = 0; c < prior.components.size(); ++c) {
    const GaussianPrior& g = prior.components[c];
    // Grid log-density of x under component c: sum_k -|u_k|^2 / (2V_k) - log(V_k) / 2, u = F(x) / sqrt(N).
    double lw = std::log(prior.weights[c]);
    std::vector<cplx> m(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = kern.decay[k];
      const double total = d * d * g.variance[k] + kern.variance[k];
      if (!(total > 0.0))
        throw Error(ErrorKind::SingularKernel, "marginal variance vanishes at t = " + std::to_string(t));
      const cplx resid = fx[k] - d * g.mean[k];
      lw -= 0.5 * (std::norm(resid) * inv_n / total + std::log(total));
      m[k] = g.mean[k] + (d * g.variance[k] / total) * resid;
    }
    log_w.push_back(lw);
    post.push_back(std::move(m));
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double& lw : log_w) z += (lw = std::exp(lw - top));
  std::vector<cplx> mean(n, cplx{});
  for (std::size_t c = 0; c < post.size(); ++c)
    for (std::size_t k = 0; k < n; ++k) mean[k] += (log_w[c] / z) * post[c][k];
  return x.with_values(to_values(std::move(mean), shape));
}

Denoiser make_mixture_denoiser(const DiffusionProcess& process, GaussianMixturePrior prior) {
  return [&process, prior = std::move(prior)](const GridFunction& x, double t) {
    return mixture_posterior_mean(x, t, process, prior);
  };
}

GridFunction conditional_score(const GridFunction& x, const GridFunction& x0, double t,
                               const DiffusionProcess& process) {
  require_same_grid(x, x0);
  const auto kern = process.kernel(x.shape(), t);
  require_positive(kern.variance, t);
  return combine(x, x0, [&](std::size_t k, cplx fx, cplx fx0) {
    return -(fx - kern.decay[k] * fx0) / kern.variance[k];
  });
}

GridFunction gaussian_true_score(const GridFunction& x, double t, const DiffusionProcess& process,
                                 const GaussianPrior& prior) {
  if (x.channels() != 1 || x.axes() != prior.axes)
    throw Error(ErrorKind::InvalidArgument, "prior grid does not match the state");
  const auto kern = process.kernel(x.shape(), t);
  const Shape shape = x.shape();
  const std::size_t n = x.num_points();
  auto fx = to_spectrum(x.values(), shape);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = kern.decay[k];
    const double total = d * d * prior.variance[k] + kern.variance[k];
    if (!(total > 0.0))
      throw Error(ErrorKind::SingularKernel, "marginal variance vanishes at t = " + std::to_string(t));
    fx[k] = -(fx[k] - d * prior.mean[k]) / total;
  }
  return x.with_values(to_values(std::move(fx), shape));
}

GridFunction parametric_score(const GridFunction& x, double t, const Denoiser& denoise,
                              const DiffusionProcess& process) {
  const auto kern = process.kernel(x.shape(), t);
  require_positive(kern.variance, t);
  const GridFunction denoised = denoise(x, t);
  require_same_grid(x, denoised);
  return combine(x, denoised, [&](std::size_t k, cplx fx, cplx fd) {
    return -(fx - kern.decay[k] * fd) / kern.variance[k];
  });
}

GridFunction gamma_tilde(const GridFunction& x, const GridFunction& x0, double t, const Denoiser& denoise,
                         const DiffusionProcess& process) {
  require_same_grid(x, x0);
  const auto kern = process.kernel(x.shape(), t);
  require_positive(kern.variance, t);
  const GridFunction denoised = denoise(x, t);
  require_same_grid(x, denoised);
  return combine(denoised, x0, [&](std::size_t k, cplx fd, cplx fx0) {
    return (kern.decay[k] / kern.variance[k]) * (fd - fx0);
  });
}

ScoreField make_gaussian_score(const DiffusionProcess& process, GaussianPrior prior) {
  return {ScoreKind::AnalyticGaussian,
          [&process, prior = std::move(prior)](const GridFunction& x, double t) {
            return gaussian_true_score(x, t, process, prior);
          }};
}

ScoreField make_parametric_score(const DiffusionProcess& process, Denoiser denoise) {
  return {ScoreKind::Parametric, [&process, denoise = std::move(denoise)](const GridFunction& x, double t) {
            return parametric_score(x, t, denoise, process);
          }};
}

}  // namespace fdp
