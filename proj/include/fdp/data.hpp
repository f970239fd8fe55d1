#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fdp/score.hpp"
#include "fdp/spectral.hpp"

namespace fdp {

enum class QuadraticNoise { PerPoint, PerSample };

const char* noise_mode_name(QuadraticNoise m);
QuadraticNoise parse_noise_mode(const std::string& name);

/// X0[p] = q p^2 + eps on a uniform periodic grid of [lo, hi), q = +-1 with equal probability.
struct QuadraticDatasetSpec {
  std::size_t points = 100;
  double lo = -1.0;
  double hi = 1.0;
  double sigma = 0.1;
  std::size_t count = 4096;
  std::uint64_t seed = 0;
  /// PerPoint: eps i.i.d. at every grid point. PerSample: one offset per curve.
  QuadraticNoise noise = QuadraticNoise::PerPoint;
};

/// Sample i uses the stream (seed, i): first q, then the noise.
std::vector<GridFunction> generate_quadratic(const QuadraticDatasetSpec& spec);
GridFunction quadratic_sample(const QuadraticDatasetSpec& spec, double q, Rng& rng);

/// The data law as a two-component Gaussian mixture on the DFT coefficients (q = +-1).
GaussianMixturePrior quadratic_prior(const QuadraticDatasetSpec& spec);

struct QuadraticFit {
  double q_hat = 0.0;
  /// Mean squared residual after removing q_hat p^2.
  double residual_mse = 0.0;
};

/// Least-squares coefficient of p^2: <x, p^2> / <p^2, p^2> over the grid.
QuadraticFit fit_quadratic(const GridFunction& sample);

struct QuadraticSummary {
  std::size_t count = 0;
  /// Fraction with |q_hat - 1| < band or |q_hat + 1| < band.
  double in_band = 0.0;
  double positive_fraction = 0.0;
  double negative_fraction = 0.0;
  double mean_residual_mse = 0.0;
  /// Fraction with |q_hat| in (1 - band, 1 + band) and residual MSE <= mse_cap.
  double accepted = 0.0;
};

QuadraticSummary summarize_quadratic(const std::vector<GridFunction>& samples, double band = 0.3,
                                     double mse_cap = 0.05);

/// Per-DFT-index mean (unnormalized coefficients) and variance (unitary units) of channel 0 over a corpus.
struct FrequencyStatistics {
  std::vector<cplx> mean;
  std::vector<double> variance;
};
FrequencyStatistics frequency_statistics(const std::vector<GridFunction>& samples);
/// Independent-coefficient Gaussian with the corpus's per-frequency mean and variance.
GaussianPrior fit_gaussian_prior(const std::vector<GridFunction>& samples);

/**
 * Dataset directory: meta.json (free-form metadata plus shard list) and
 * shard-NNN.fdpg files holding consecutive samples.
 */
void save_dataset(const std::filesystem::path& dir, const std::vector<GridFunction>& samples,
                  const std::string& meta_json, std::size_t shard_size = 1024);
std::vector<GridFunction> load_dataset(const std::filesystem::path& dir);
std::string quadratic_meta(const QuadraticDatasetSpec& spec);

}  // namespace fdp
