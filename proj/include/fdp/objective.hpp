#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdp/inr.hpp"
#include "fdp/process.hpp"
#include "fdp/score.hpp"

namespace fdp {

/**
 * @brief Per-frequency weighting of the denoiser residual R = D - x0.
 *
 * Elbo:     w_k = (decay_k / s_k)^2 / r_k, i.e. |gamma_tilde|^2 in the r^{-1/2}-weighted norm.
 * Simple:   Elbo scaled by lambda(t) = mean_k s_k(t).
 * Denoiser: w_k = 1, plain squared error of the denoised function.
 * MinSnr:   w_k = min(decay_k^2 / s_k, min_snr_gamma), the per-frequency signal-to-noise ratio capped.
 */
enum class LossWeighting { Elbo, Simple, Denoiser, MinSnr };
inline constexpr double min_snr_gamma = 5.0;

const char* weighting_name(LossWeighting w);
LossWeighting parse_weighting(const std::string& name);

/// Weights indexed like the DFT array of the grid; symmetric under k -> -k.
std::vector<double> loss_weights(const DiffusionProcess& process, const SpectralWeights& sw, double t,
                                 LossWeighting weighting);

struct LossSample {
  GridFunction x0;
  double t = 0.0;
  /// Unit Hermitian noise spectrum per channel used for x_t.
  std::vector<std::vector<cplx>> noise;
  GridFunction x_t;
  GridFunction denoised;
  double loss = 0.0;
  /// Contribution of every DFT index (summed over channels); sums to `loss`.
  std::vector<double> per_frequency;
};

/// loss = N^-1 sum_k w_k |F(D - x0)_k|^2 with x_t drawn from the forward kernel.
LossSample elbo_loss(const GridFunction& x0, double t, const Denoiser& denoise, const DiffusionProcess& process,
                     Rng& rng, LossWeighting weighting = LossWeighting::Elbo);
LossSample elbo_loss_with_noise(const GridFunction& x0, double t, std::vector<std::vector<cplx>> noise,
                                const Denoiser& denoise, const DiffusionProcess& process,
                                LossWeighting weighting = LossWeighting::Elbo);

struct ObjectiveConfig {
  LossWeighting weighting = LossWeighting::Elbo;
  /// Times are drawn uniformly from [t_min, t_max]; t_max <= 0 means the horizon T.
  double t_min = 1e-4;
  double t_max = 0.0;
};

/// Time and noise of batch element `element` at training step `step`.
struct ElementDraw {
  double t = 0.0;
  std::vector<std::vector<cplx>> noise;
};
ElementDraw draw_element(const GridFunction& x0, const DiffusionProcess& process, const ObjectiveConfig& cfg,
                         std::uint64_t seed, std::uint64_t step, std::uint64_t element);

/// Differentiable loss of one element: the inner loop and the forward pass on the tape.
ad::Var element_loss(const InrArchitecture& arch, std::span<const ad::Var> params, const GridFunction& x0,
                     const ElementDraw& draw, const DiffusionProcess& process, LossWeighting weighting);

struct BatchLoss {
  double loss = 0.0;
  std::vector<double> element_loss;
  std::vector<double> element_t;
  /// Gradient of the mean loss, same layout as InrNetwork::parameters(); empty unless requested.
  std::vector<ad::Matrix> gradient;
};

/// Mean element loss over the batch; element i uses the stream (seed, step, i). Throws EmptyBatch.
BatchLoss batch_loss(const std::vector<GridFunction>& batch, const InrNetwork& net, const DiffusionProcess& process,
                     const ObjectiveConfig& cfg, std::uint64_t seed, std::uint64_t step, bool with_gradient);

/**
 * @brief Minimizer of the conditional objective over the linear family s^k = theta^k x^k.
 *
 * Draws n pairs (X0 ~ prior, X_t | X0) at time t and returns, per DFT index,
 * theta^k = sum Re(conj(X_t^k) c^k) / sum |X_t^k|^2 with c the conditional
 * score. The family is separable, so the weighting does not move the minimizer.
 */
std::vector<double> fit_linear_score(const DiffusionProcess& process, const GaussianPrior& prior, double t,
                                     std::size_t n, Rng& rng);

}  // namespace fdp
