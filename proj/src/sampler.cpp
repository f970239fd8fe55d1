#include "fdp/sampler.hpp"

#include <cmath>

#include "fdp/error.hpp"
#include "fdp/parallel.hpp"

namespace fdp {

namespace {

using Spectra = std::vector<std::vector<cplx>>;

Spectra spectra_of(const GridFunction& f) {
  Spectra s;
  const Shape shape = f.shape();
  for (std::size_t c = 0; c < f.channels(); ++c) s.push_back(to_spectrum(f.channel(c), shape));
  return s;
}

GridFunction grid_of(const std::vector<Axis>& axes, const Spectra& s) {
  const Shape shape = shape_of(axes);
  const std::size_t n = num_points(axes);
  const std::size_t channels = s.size();
  std::vector<double> out(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto v = to_values(s[c], shape);
    for (std::size_t i = 0; i < n; ++i) out[i * channels + c] = v[i];
  }
  return GridFunction(axes, channels, std::move(out));
}

bool all_finite(const Spectra& s) {
  for (const auto& ch : s)
    for (const auto& z : ch)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

struct Overwrite {
  const Condition* condition = nullptr;
  Rng* rng = nullptr;
  bool active = false;
};

void apply_condition(Spectra& state, const std::vector<Axis>& axes, double t, const DiffusionProcess& process,
                     Overwrite& ow) {
  if (!ow.active) return;
  const Condition& cond = *ow.condition;
  const GridFunction y_t = process.forward_sample(*cond.reference, t, *ow.rng);
  const std::size_t channels = state.size();
  if (cond.kind == Condition::Kind::Spectral) {
    const Spectra ys = spectra_of(y_t);
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t k = 0; k < state[c].size(); ++k)
        state[c][k] = cond.mask[k] * ys[c][k] + (1.0 - cond.mask[k]) * state[c][k];
    return;
  }
  const GridFunction x = grid_of(axes, state);
  const std::size_t n = x.num_points();
  const bool per_point = cond.mask.size() == n;
  std::vector<double> v(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t idx = i * channels + c;
      const double m = cond.mask[per_point ? i : idx];
      v[idx] = m * y_t.values()[idx] + (1.0 - m) * v[idx];
    }
  state = spectra_of(x.with_values(std::move(v)));
}

struct Frequencies {
  std::vector<double> b, r;
};

double corrector_update(Spectra& state, const std::vector<Axis>& axes, double t, const ScoreField& score,
                        const Frequencies& w, double snr, Rng& rng) {
  const Shape shape = shape_of(axes);
  const std::size_t n = num_points(axes);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const Spectra s = spectra_of(score(grid_of(axes, state), t));
  Spectra xi;
  double noise_sq = 0.0, grad_sq = 0.0;
  for (std::size_t c = 0; c < state.size(); ++c) {
    xi.push_back(hermitian_noise(shape, rng));
    for (std::size_t k = 0; k < n; ++k) {
      noise_sq += std::norm(xi[c][k]);
      grad_sq += w.r[k] * std::norm(s[c][k]) / static_cast<double>(n);
    }
  }
  const double eta = grad_sq > 0.0 ? 2.0 * snr * snr * noise_sq / grad_sq : 0.0;
  for (std::size_t c = 0; c < state.size(); ++c)
    for (std::size_t k = 0; k < n; ++k)
      state[c][k] += eta * w.r[k] * s[c][k] + std::sqrt(2.0 * eta * w.r[k]) * sqrt_n * xi[c][k];
  return eta;
}

SampleResult run(const ScoreField& score, const DiffusionProcess& process, const std::vector<Axis>& axes,
                 std::size_t channels, const SamplerConfig& cfg, Rng& rng, const Denoiser* denoiser,
                 Overwrite ow) {
  cfg.validate(process.horizon());
  if (channels == 0) throw Error(ErrorKind::InvalidArgument, "sampler needs at least one channel");
  if (cfg.denoise_final && !denoiser) throw Error(ErrorKind::InvalidArgument, "denoise_final requires a denoiser");
  const Shape shape = shape_of(axes);
  const std::size_t n = num_points(axes);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const auto sw = process.weights(shape);
  const Frequencies w{sw.b, sw.r};
  const auto stationary = process.stationary_variance(shape);
  const double T = process.horizon();
  const double dt = (T - cfg.t_min) / static_cast<double>(cfg.n_steps);

  Spectra state(channels);
  for (auto& ch : state) {
    ch = hermitian_noise(shape, rng);
    for (std::size_t k = 0; k < n; ++k) ch[k] *= std::sqrt(stationary[k]) * sqrt_n;
  }
  apply_condition(state, axes, T, process, ow);

  SampleResult result{GridFunction::zeros(axes, channels), {}, {}};
  auto record = [&](double t) {
    result.times.push_back(t);
    result.trajectory.push_back(grid_of(axes, state));
  };
  if (cfg.trajectory_every > 0) record(T);

  for (std::size_t i = 0; i < cfg.n_steps; ++i) {
    const double t = T - static_cast<double>(i) * dt;
    const double t_next = i + 1 == cfg.n_steps ? cfg.t_min : T - static_cast<double>(i + 1) * dt;
    if (cfg.scheme == SamplerScheme::PredictorCorrector)
      for (std::size_t j = 0; j < cfg.corrector_steps; ++j) corrector_update(state, axes, t, score, w, cfg.snr, rng);
    const Spectra s = spectra_of(score(grid_of(axes, state), t));
    const double bdt = process.schedule().beta(t) * dt;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto xi = hermitian_noise(shape, rng);
      if (cfg.integrator == ReverseIntegrator::Euler) {
        for (std::size_t k = 0; k < n; ++k)
          state[c][k] += (w.b[k] * state[c][k] + w.r[k] * s[c][k]) * bdt + std::sqrt(w.r[k] * bdt) * sqrt_n * xi[k];
      } else {
        // Linear part b C solved exactly over the step with the score held fixed.
        for (std::size_t k = 0; k < n; ++k) {
          const double h = w.b[k] * bdt;
          const double growth = std::exp(h);
          const double gain = std::expm1(h) / w.b[k];
          const double var = w.r[k] * std::expm1(2.0 * h) / (2.0 * w.b[k]);
          state[c][k] = growth * state[c][k] + w.r[k] * gain * s[c][k] + std::sqrt(var) * sqrt_n * xi[k];
        }
      }
    }
    apply_condition(state, axes, t_next, process, ow);
    if (!all_finite(state))
      throw Error(ErrorKind::NonFiniteState, "reverse sampler produced a non-finite state at step " + std::to_string(i + 1) +
                                                 " (t = " + std::to_string(t_next) + ")");
    if (cfg.trajectory_every > 0 && ((i + 1) % cfg.trajectory_every == 0 || i + 1 == cfg.n_steps)) record(t_next);
  }
  result.sample = grid_of(axes, state);
  if (cfg.denoise_final) result.sample = (*denoiser)(result.sample, cfg.t_min);
  return result;
}

}  // namespace

const char* integrator_name(ReverseIntegrator i) { return i == ReverseIntegrator::Euler ? "euler" : "exponential"; }

ReverseIntegrator parse_integrator(const std::string& name) {
  if (name == "euler") return ReverseIntegrator::Euler;
  if (name == "exponential") return ReverseIntegrator::Exponential;
  throw Error(ErrorKind::Config, "unknown reverse integrator '" + name + "' (expected euler | exponential)");
}

const char* scheme_name(SamplerScheme s) { return s == SamplerScheme::EulerMaruyama ? "em" : "pc"; }

SamplerScheme parse_scheme(const std::string& name) {
  if (name == "em") return SamplerScheme::EulerMaruyama;
  if (name == "pc" || name == "predictor-corrector") return SamplerScheme::PredictorCorrector;
  throw Error(ErrorKind::Config, "unknown sampler scheme '" + name + "' (expected em | pc)");
}

void SamplerConfig::validate(double horizon) const {
  if (n_steps == 0) throw Error(ErrorKind::StepCountZero, "sampler needs n_steps >= 1");
  if (!(t_min > 0.0 && t_min < horizon)) throw Error(ErrorKind::InvalidTime, "sampler t_min must lie in (0, T)");
  if (scheme == SamplerScheme::PredictorCorrector && !(snr > 0.0))
    throw Error(ErrorKind::Config, "predictor-corrector needs snr > 0");
}

SampleResult reverse_sample(const ScoreField& score, const DiffusionProcess& process, const std::vector<Axis>& axes,
                            std::size_t channels, const SamplerConfig& cfg, Rng& rng, const Denoiser* denoiser) {
  return run(score, process, axes, channels, cfg, rng, denoiser, Overwrite{});
}

SampleResult conditional_sample(const ScoreField& score, const DiffusionProcess& process, const SamplerConfig& cfg,
                                const Condition& condition, Rng& rng, Rng& reference_rng, const Denoiser* denoiser) {
  if (condition.kind == Condition::Kind::None || !condition.reference)
    throw Error(ErrorKind::InvalidArgument, "conditional_sample needs a mask kind and a reference");
  const GridFunction& y = *condition.reference;
  const std::size_t n = y.num_points();
  const bool spatial = condition.kind == Condition::Kind::Spatial;
  const bool size_ok = spatial ? (condition.mask.size() == n || condition.mask.size() == n * y.channels())
                               : condition.mask.size() == n;
  if (!size_ok)
    throw Error(ErrorKind::MaskShapeMismatch, "mask has " + std::to_string(condition.mask.size()) +
                                                  " entries for a grid of " + std::to_string(n) + " points");
  bool any = false;
  for (double m : condition.mask) {
    if (m != 0.0 && m != 1.0) throw Error(ErrorKind::MaskShapeMismatch, "mask entries must be 0 or 1");
    any = any || m != 0.0;
  }
  if (!spatial) {
    const Shape shape = y.shape();
    for (std::size_t k = 0; k < n; ++k)
      if (condition.mask[k] != condition.mask[conjugate_index(k, shape)])
        throw Error(ErrorKind::MaskShapeMismatch, "frequency mask must be symmetric under k -> -k");
  }
  return run(score, process, y.axes(), y.channels(), cfg, rng, denoiser, Overwrite{&condition, &reference_rng, any});
}

CorrectorResult corrector_step(const GridFunction& x, double t, const ScoreField& score,
                               const DiffusionProcess& process, double snr, Rng& rng) {
  process.check_time(t);
  const auto sw = process.weights(x.shape());
  Spectra state = spectra_of(x);
  const double eta = corrector_update(state, x.axes(), t, score, Frequencies{sw.b, sw.r}, snr, rng);
  return {grid_of(x.axes(), state), eta};
}

std::vector<GridFunction> sample_chains(const ScoreField& score, const DiffusionProcess& process,
                                        const std::vector<Axis>& axes, std::size_t channels, const SamplerConfig& cfg,
                                        std::size_t n_chains, std::uint64_t seed, const Denoiser* denoiser) {
  std::vector<std::optional<GridFunction>> out(n_chains);
  parallel_for(n_chains, [&](std::size_t i) {
    Rng rng(seed, i);
    out[i] = reverse_sample(score, process, axes, channels, cfg, rng, denoiser).sample;
  });
  std::vector<GridFunction> samples;
  samples.reserve(n_chains);
  for (auto& s : out) samples.push_back(std::move(*s));
  return samples;
}

}  // namespace fdp
