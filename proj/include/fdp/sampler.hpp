#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdp/process.hpp"
#include "fdp/score.hpp"

namespace fdp {

enum class SamplerScheme { EulerMaruyama, PredictorCorrector };

const char* scheme_name(SamplerScheme s);
SamplerScheme parse_scheme(const std::string& name);

/**
 * Euler: plain Euler-Maruyama on the whole drift.
 * Exponential: the linear b C part and its noise are integrated exactly over
 * each step with the score frozen; same SDE, no O(b beta dt) bias on the
 * growth phase of fast frequencies.
 */
enum class ReverseIntegrator { Euler, Exponential };

const char* integrator_name(ReverseIntegrator i);
ReverseIntegrator parse_integrator(const std::string& name);

struct SamplerConfig {
  std::size_t n_steps = 500;
  /// Integration stops at t_min > 0 (the score is singular at 0).
  double t_min = 1e-4;
  SamplerScheme scheme = SamplerScheme::EulerMaruyama;
  ReverseIntegrator integrator = ReverseIntegrator::Exponential;
  std::size_t corrector_steps = 1;
  double snr = 0.16;
  /// Replace the final state by the denoiser's estimate at t_min.
  bool denoise_final = false;
  /// Record the state every K steps (0: no trajectory).
  std::size_t trajectory_every = 0;

  void validate(double horizon) const;
};

/// Known entries of a conditional run: values on the grid (Spatial) or DFT indices (Spectral), in {0, 1}.
struct Condition {
  enum class Kind { None, Spatial, Spectral };
  Kind kind = Kind::None;
  std::vector<double> mask;
  std::optional<GridFunction> reference;
};

struct SampleResult {
  GridFunction sample;
  /// Time stamps and states of the recorded trajectory, T first.
  std::vector<double> times;
  std::vector<GridFunction> trajectory;
};

/**
 * @brief Integration of the reverse SDE, optionally with Langevin corrector steps.
 *
 * Per coefficient, from T down to t_min on a uniform grid, the Euler step is
 *   C <- C + [b C + r F(score)] beta dt + sqrt(r beta dt) sqrt(N) xi,
 * started from the stationary law N(0, r / 2b). Throws NonFiniteState naming
 * the step when the state blows up.
 */
SampleResult reverse_sample(const ScoreField& score, const DiffusionProcess& process, const std::vector<Axis>& axes,
                            std::size_t channels, const SamplerConfig& cfg, Rng& rng,
                            const Denoiser* denoiser = nullptr);

/**
 * @brief Same integration with known entries overwritten after every step.
 *
 * The overwrite uses a forward-diffused draw of the reference at the current
 * time, taken from `reference_rng` so the main stream matches the
 * unconditional run. An all-zero mask leaves the state untouched.
 */
SampleResult conditional_sample(const ScoreField& score, const DiffusionProcess& process, const SamplerConfig& cfg,
                                const Condition& condition, Rng& rng, Rng& reference_rng,
                                const Denoiser* denoiser = nullptr);

struct CorrectorResult {
  GridFunction x;
  double eta = 0.0;
};

/**
 * @brief One preconditioned Langevin step at fixed t.
 *
 * eta = 2 (snr ||xi|| / ||sqrt(r) score||)^2 in unitary coefficients, then
 * C <- C + eta r F(score) + sqrt(2 eta r) sqrt(N) xi.
 */
CorrectorResult corrector_step(const GridFunction& x, double t, const ScoreField& score,
                               const DiffusionProcess& process, double snr, Rng& rng);

/// Independent chains with streams (seed, chain); results in chain order.
std::vector<GridFunction> sample_chains(const ScoreField& score, const DiffusionProcess& process,
                                        const std::vector<Axis>& axes, std::size_t channels, const SamplerConfig& cfg,
                                        std::size_t n_chains, std::uint64_t seed, const Denoiser* denoiser = nullptr);

}  // namespace fdp
