#pragma once

#include <functional>
#include <vector>

#include "fdp/process.hpp"
#include "fdp/spectral.hpp"

namespace fdp {

/// Denoiser surrogate for E[X0 | X_t = x]; output lives on the input grid.
using Denoiser = std::function<GridFunction(const GridFunction& x, double t)>;

enum class ScoreKind { AnalyticConditional, AnalyticGaussian, Parametric };

/// A score D_x log rho_t evaluated on the grid of its argument.
struct ScoreField {
  ScoreKind kind = ScoreKind::Parametric;
  std::function<GridFunction(const GridFunction& x, double t)> fn;

  GridFunction operator()(const GridFunction& x, double t) const { return fn(x, t); }
};

/**
 * @brief Independent Gaussian law on the DFT coefficients of X0.
 *
 * `mean` holds unnormalized DFT coefficients (Hermitian); `variance` is per
 * unitary-normalized coefficient, so white noise of per-point variance v has
 * variance v at every frequency. Single channel.
 */
struct GaussianPrior {
  std::vector<Axis> axes;
  std::vector<cplx> mean;
  std::vector<double> variance;

  static GaussianPrior zero_mean(std::vector<Axis> axes, std::vector<double> variance);
  /// Draws a sample of X0.
  GridFunction sample(Rng& rng) const;
};

/// Finite mixture of GaussianPriors sharing one grid; weights sum to 1.
struct GaussianMixturePrior {
  std::vector<GaussianPrior> components;
  std::vector<double> weights;

  GridFunction sample(Rng& rng) const;
};

/// Exact E[X0 | X_t = x] under a mixture prior (Bayes-optimal denoiser).
GridFunction mixture_posterior_mean(const GridFunction& x, double t, const DiffusionProcess& process,
                                    const GaussianMixturePrior& prior);
Denoiser make_mixture_denoiser(const DiffusionProcess& process, GaussianMixturePrior prior);

/// -(F(x) - decay F(x0)) / s, inverse transformed.
GridFunction conditional_score(const GridFunction& x, const GridFunction& x0, double t,
                               const DiffusionProcess& process);

/// Exact score of the time-t marginal when X0 follows `prior`.
GridFunction gaussian_true_score(const GridFunction& x, double t, const DiffusionProcess& process,
                                 const GaussianPrior& prior);

/// -(F(x) - decay F(denoise(x, t))) / s, inverse transformed.
GridFunction parametric_score(const GridFunction& x, double t, const Denoiser& denoise,
                              const DiffusionProcess& process);

/// (decay / s)(F(denoise(x, t)) - F(x0)): parametric minus conditional score, before
/// any r weighting (which lives in the objective's norm).
GridFunction gamma_tilde(const GridFunction& x, const GridFunction& x0, double t, const Denoiser& denoise,
                         const DiffusionProcess& process);

ScoreField make_gaussian_score(const DiffusionProcess& process, GaussianPrior prior);
ScoreField make_parametric_score(const DiffusionProcess& process, Denoiser denoise);

}  // namespace fdp
