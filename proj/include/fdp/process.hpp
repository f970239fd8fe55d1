#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fdp/rng.hpp"
#include "fdp/spectral.hpp"

namespace fdp {

/**
 * @brief Per-frequency drift magnitudes b and noise coefficients r of the forward process.
 *
 * The effective drift is -b (mean reversion), so every coefficient follows
 * dC = -b beta(t) C dt + sqrt(r beta(t)) dW. Tables are keyed on |k| (1D) or
 * (|k|, |m|) (2D, flattened row-major over (max_frequency + 1)^2), so
 * conjugate frequencies share coefficients.
 */
struct OperatorSpectrum {
  std::size_t ndim = 1;
  std::size_t max_frequency = 0;
  std::vector<double> drift;
  std::vector<double> noise;
  /// Upper bound B_max on the drift magnitude.
  double drift_bound = 10.0;
  /// |k| from which r must be non-increasing and decay faster than 1/|k|.
  std::size_t tail_start = 1;

  std::size_t table_index(std::span<const std::size_t> abs_k) const;
  double b(std::span<const std::size_t> abs_k) const { return drift[table_index(abs_k)]; }
  double r(std::span<const std::size_t> abs_k) const { return noise[table_index(abs_k)]; }

  /// b^k = min(sqrt k, 10) with b^0 = 1; r^k = k^-2 with r^0 = 1.
  static OperatorSpectrum toy1d(std::size_t max_frequency);
  /// r^{k,m} = 176/(k^2+m^2+2), b^{k,m} = min(1/(k^2+m^2+0.3) + (r^{k,m}/33)^{1/4}, 3.6).
  static OperatorSpectrum image2d(std::size_t max_frequency);
  static OperatorSpectrum uniform(std::size_t ndim, std::size_t max_frequency, double b, double r);
  /// Tables from explicit 1D lists indexed by |k|.
  static OperatorSpectrum table1d(std::vector<double> b, std::vector<double> r);
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  std::string summary() const;
};

/// Boundedness, positivity and trace-class proxy checks on a spectrum.
ValidationReport validate_spectrum(const OperatorSpectrum& spectrum);

/// Time rescaling beta(t) on [0, T]; tau(t) is its integral.
struct TimeSchedule {
  enum class Kind { Constant, Linear, Cosine };
  Kind kind = Kind::Constant;
  double horizon = 1.0;
  /// Constant: beta = beta_min. Linear: beta_min -> beta_max. Cosine: beta_min + (beta_max - beta_min)(1 - cos(pi t/T))/2.
  double beta_min = 1.0;
  double beta_max = 1.0;

  double beta(double t) const;
  double tau(double t) const;
  void validate() const;

  static TimeSchedule constant(double horizon = 1.0, double beta = 1.0);
  static const char* kind_name(Kind k);
  static Kind parse_kind(const std::string& name);
};

/// Per-grid-frequency b and r, indexed like the DFT array of the grid.
struct SpectralWeights {
  Shape shape;
  std::vector<double> b;
  std::vector<double> r;
};

/**
 * @brief Transition statistics of the forward process at time t.
 *
 * decay^k = exp(-b^k tau(t)); variance^k = r^k (1 - exp(-2 b^k tau(t))) / (2 b^k).
 * The variance is per unitary-normalized coefficient (|DFT|^2 / N), which is
 * also the per-point variance of white noise with that spectrum.
 */
struct PerturbationKernel {
  double t = 0.0;
  std::vector<double> decay;
  std::vector<double> variance;
};

class DiffusionProcess {
 public:
  /// Throws InvalidSpectrum when validate_spectrum fails.
  DiffusionProcess(OperatorSpectrum spectrum, TimeSchedule schedule);
  /// Skips validate_spectrum (test harnesses exercising non-trace-class spectra such as r = 1).
  static DiffusionProcess unchecked(OperatorSpectrum spectrum, TimeSchedule schedule);

  const OperatorSpectrum& spectrum() const noexcept { return spectrum_; }
  const TimeSchedule& schedule() const noexcept { return schedule_; }
  double horizon() const noexcept { return schedule_.horizon; }

  SpectralWeights weights(const Shape& shape) const;
  PerturbationKernel kernel(const SpectralWeights& w, double t) const;
  PerturbationKernel kernel(const Shape& shape, double t) const { return kernel(weights(shape), t); }

  /// Stationary per-coefficient variance r^k / (2 b^k).
  std::vector<double> stationary_variance(const Shape& shape) const;

  /// Exact one-shot draw of X_t given X_0; returns x0 unchanged at t = 0.
  GridFunction forward_sample(const GridFunction& x0, double t, Rng& rng) const;
  /// Same draw with an explicit unit-variance Hermitian noise spectrum per channel (channel-major).
  GridFunction forward_sample_with_noise(const GridFunction& x0, double t,
                                         const std::vector<std::vector<cplx>>& noise) const;

  struct IntegrateOptions {
    /// Multiplies the diffusion coefficient; 0 gives the deterministic ODE.
    double noise_scale = 1.0;
  };
  /// Euler-Maruyama path of the spectral SDE from 0 to t.
  GridFunction forward_integrate(const GridFunction& x0, double t, Rng& rng, std::size_t n_steps,
                                 IntegrateOptions options) const;
  GridFunction forward_integrate(const GridFunction& x0, double t, Rng& rng, std::size_t n_steps) const {
    return forward_integrate(x0, t, rng, n_steps, IntegrateOptions{});
  }

  void check_time(double t) const;

 private:
  struct Unchecked {};
  DiffusionProcess(OperatorSpectrum spectrum, TimeSchedule schedule, Unchecked);

  OperatorSpectrum spectrum_;
  TimeSchedule schedule_;
};

}  // namespace fdp
