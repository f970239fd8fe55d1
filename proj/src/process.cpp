#include "fdp/process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fdp/error.hpp"

namespace fdp {

std::size_t OperatorSpectrum::table_index(std::span<const std::size_t> abs_k) const {
  if (abs_k.size() != ndim) throw Error(ErrorKind::InvalidArgument, "frequency rank does not match spectrum");
  std::size_t idx = 0;
  for (auto k : abs_k) {
    if (k > max_frequency)
      throw Error(ErrorKind::InvalidSpectrum,
                  "frequency " + std::to_string(k) + " beyond spectrum truncation " + std::to_string(max_frequency));
    idx = idx * (max_frequency + 1) + k;
  }
  return idx;
}

OperatorSpectrum OperatorSpectrum::toy1d(std::size_t max_frequency) {
  OperatorSpectrum s;
  s.ndim = 1;
  s.max_frequency = max_frequency;
  s.drift.resize(max_frequency + 1);
  s.noise.resize(max_frequency + 1);
  for (std::size_t k = 0; k <= max_frequency; ++k) {
    const double kk = static_cast<double>(k);
    s.drift[k] = k == 0 ? 1.0 : std::min(std::sqrt(kk), 10.0);
    s.noise[k] = k == 0 ? 1.0 : 1.0 / (kk * kk);
  }
  s.drift_bound = 10.0;
  s.tail_start = 1;
  return s;
}

OperatorSpectrum OperatorSpectrum::image2d(std::size_t max_frequency) {
  OperatorSpectrum s;
  s.ndim = 2;
  s.max_frequency = max_frequency;
  const std::size_t n = max_frequency + 1;
  s.drift.resize(n * n);
  s.noise.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      const double q = static_cast<double>(k * k + m * m);
      const double r = 176.0 / (q + 2.0);
      s.noise[k * n + m] = r;
      s.drift[k * n + m] = std::min(1.0 / (q + 0.3) + std::pow(r / 33.0, 0.25), 3.6);
    }
  }
  s.drift_bound = 3.6;
  s.tail_start = 1;
  return s;
}

OperatorSpectrum OperatorSpectrum::uniform(std::size_t ndim, std::size_t max_frequency, double b, double r) {
  OperatorSpectrum s;
  s.ndim = ndim;
  s.max_frequency = max_frequency;
  std::size_t n = 1;
  for (std::size_t a = 0; a < ndim; ++a) n *= max_frequency + 1;
  s.drift.assign(n, b);
  s.noise.assign(n, r);
  s.drift_bound = std::max(b, 10.0);
  return s;
}

OperatorSpectrum OperatorSpectrum::table1d(std::vector<double> b, std::vector<double> r) {
  if (b.empty() || b.size() != r.size())
    throw Error(ErrorKind::InvalidSpectrum, "drift and noise tables must be non-empty and equally long");
  OperatorSpectrum s;
  s.ndim = 1;
  s.max_frequency = b.size() - 1;
  s.drift = std::move(b);
  s.noise = std::move(r);
  return s;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  return os.str();
}

ValidationReport validate_spectrum(const OperatorSpectrum& s) {
  ValidationReport report;
  std::size_t expected = 1;
  for (std::size_t a = 0; a < s.ndim; ++a) expected *= s.max_frequency + 1;
  const bool shaped = s.ndim >= 1 && s.drift.size() == expected && s.noise.size() == expected;
  report.checks.push_back({"table-shape", shaped,
                           "expected " + std::to_string(expected) + " entries per table"});
  if (!shaped) return report;

  auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  report.checks.push_back({"finite", all_finite(s.drift) && all_finite(s.noise), "all coefficients finite"});

  const double b_min = *std::min_element(s.drift.begin(), s.drift.end());
  const double b_max = *std::max_element(s.drift.begin(), s.drift.end());
  {
    std::ostringstream d;
    d << "0 < b <= " << s.drift_bound << " (observed " << b_min << " .. " << b_max << ")";
    report.checks.push_back({"bounded-drift", b_min > 0.0 && b_max <= s.drift_bound, d.str()});
  }
  const double r_min = *std::min_element(s.noise.begin(), s.noise.end());
  report.checks.push_back({"positive-noise", r_min > 0.0, "r > 0 (observed min " + std::to_string(r_min) + ")"});

  // Trace-class proxy: along every axis line, r must be non-increasing from
  // tail_start on and decay faster than 1/|k| between tail_start and the cutoff.
  const std::size_t n = s.max_frequency + 1;
  bool monotone = true;
  double worst_exponent = std::numeric_limits<double>::infinity();
  const std::size_t k0 = std::max<std::size_t>(s.tail_start, 1);
  std::vector<std::size_t> idx(s.ndim, 0);
  for (std::size_t axis = 0; axis < s.ndim; ++axis) {
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t k = k0 + 1; k < n; ++k) {
      idx[axis] = k - 1;
      const double prev = s.r(idx);
      idx[axis] = k;
      if (s.r(idx) > prev) monotone = false;
    }
    if (s.max_frequency > k0) {
      idx[axis] = k0;
      const double head = s.r(idx);
      idx[axis] = s.max_frequency;
      const double tail = s.r(idx);
      if (head > 0.0 && tail > 0.0) {
        const double e = -std::log(tail / head) / std::log(static_cast<double>(s.max_frequency) / static_cast<double>(k0));
        worst_exponent = std::min(worst_exponent, e);
      } else {
        worst_exponent = -std::numeric_limits<double>::infinity();
      }
    }
  }
  std::ostringstream d;
  d << "r non-increasing from |k|=" << k0 << " and tail decay exponent > 1 (observed ";
  if (std::isinf(worst_exponent) && worst_exponent > 0) d << "n/a";
  else d << worst_exponent;
  d << ")";
  report.checks.push_back({"trace-class-proxy", monotone && worst_exponent > 1.0, d.str()});
  return report;
}

double TimeSchedule::beta(double t) const {
  switch (kind) {
    case Kind::Constant: return beta_min;
    case Kind::Linear: return beta_min + (beta_max - beta_min) * t / horizon;
    case Kind::Cosine:
      return beta_min + (beta_max - beta_min) * 0.5 * (1.0 - std::cos(std::numbers::pi * t / horizon));
  }
  return beta_min;
}

double TimeSchedule::tau(double t) const {
  switch (kind) {
    case Kind::Constant: return beta_min * t;
    case Kind::Linear: return beta_min * t + 0.5 * (beta_max - beta_min) * t * t / horizon;
    case Kind::Cosine:
      return beta_min * t +
             (beta_max - beta_min) * 0.5 * (t - horizon / std::numbers::pi * std::sin(std::numbers::pi * t / horizon));
  }
  return beta_min * t;
}

void TimeSchedule::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::Config, "schedule horizon T must be > 0");
  const bool ok = kind == Kind::Constant ? beta_min > 0.0
                                         : (beta_min >= 0.0 && beta_max >= 0.0 && beta_min + beta_max > 0.0);
  if (!ok || !std::isfinite(beta_min) || !std::isfinite(beta_max))
    throw Error(ErrorKind::Config, "schedule beta must be positive (integral strictly increasing)");
}

TimeSchedule TimeSchedule::constant(double horizon, double beta) {
  TimeSchedule s;
  s.kind = Kind::Constant;
  s.horizon = horizon;
  s.beta_min = beta;
  s.beta_max = beta;
  return s;
}

const char* TimeSchedule::kind_name(Kind k) {
  switch (k) {
    case Kind::Constant: return "constant";
    case Kind::Linear: return "linear";
    case Kind::Cosine: return "cosine";
  }
  return "constant";
}

TimeSchedule::Kind TimeSchedule::parse_kind(const std::string& name) {
  if (name == "constant") return Kind::Constant;
  if (name == "linear") return Kind::Linear;
  if (name == "cosine") return Kind::Cosine;
  throw Error(ErrorKind::Config, "unknown schedule kind '" + name + "'");
}

DiffusionProcess::DiffusionProcess(OperatorSpectrum spectrum, TimeSchedule schedule)
    : spectrum_(std::move(spectrum)), schedule_(schedule) {
  const auto report = validate_spectrum(spectrum_);
  if (!report.ok()) throw Error(ErrorKind::InvalidSpectrum, "spectrum failed validation:\n" + report.summary());
  schedule_.validate();
}

DiffusionProcess::DiffusionProcess(OperatorSpectrum spectrum, TimeSchedule schedule, Unchecked)
    : spectrum_(std::move(spectrum)), schedule_(schedule) {}

DiffusionProcess DiffusionProcess::unchecked(OperatorSpectrum spectrum, TimeSchedule schedule) {
  return DiffusionProcess(std::move(spectrum), schedule, Unchecked{});
}

SpectralWeights DiffusionProcess::weights(const Shape& shape) const {
  if (shape.size() != spectrum_.ndim) throw Error(ErrorKind::InvalidArgument, "grid rank does not match spectrum");
  SpectralWeights w;
  w.shape = shape;
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  w.b.resize(n);
  w.r.resize(n);
  for (std::size_t flat = 0; flat < n; ++flat) {
    const auto k = abs_frequencies(flat, shape);
    const std::size_t idx = spectrum_.table_index(k);
    w.b[flat] = spectrum_.drift[idx];
    w.r[flat] = spectrum_.noise[idx];
  }
  return w;
}

PerturbationKernel DiffusionProcess::kernel(const SpectralWeights& w, double t) const {
  PerturbationKernel k;
  k.t = t;
  const double tau = schedule_.tau(t);
  k.decay.resize(w.b.size());
  k.variance.resize(w.b.size());
  for (std::size_t i = 0; i < w.b.size(); ++i) {
    const double b = w.b[i];
    k.decay[i] = std::exp(-b * tau);
    k.variance[i] = -std::expm1(-2.0 * b * tau) * w.r[i] / (2.0 * b);
  }
  return k;
}

std::vector<double> DiffusionProcess::stationary_variance(const Shape& shape) const {
  const auto w = weights(shape);
  std::vector<double> v(w.b.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.r[i] / (2.0 * w.b[i]);
  return v;
}

void DiffusionProcess::check_time(double t) const {
  if (!(t >= 0.0 && t <= schedule_.horizon))
    throw Error(ErrorKind::InvalidTime, "t = " + std::to_string(t) + " outside [0, " + std::to_string(schedule_.horizon) + "]");
}

GridFunction DiffusionProcess::forward_sample(const GridFunction& x0, double t, Rng& rng) const {
  check_time(t);
  if (t == 0.0) return x0;
  const Shape shape = x0.shape();
  std::vector<std::vector<cplx>> noise;
  noise.reserve(x0.channels());
  for (std::size_t c = 0; c < x0.channels(); ++c) noise.push_back(hermitian_noise(shape, rng));
  return forward_sample_with_noise(x0, t, noise);
}

GridFunction DiffusionProcess::forward_sample_with_noise(const GridFunction& x0, double t,
                                                         const std::vector<std::vector<cplx>>& noise) const {
  check_time(t);
  if (t == 0.0) return x0;
  const Shape shape = x0.shape();
  const auto kern = kernel(shape, t);
  const std::size_t n = x0.num_points();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const std::size_t channels = x0.channels();
  if (noise.size() != channels) throw Error(ErrorKind::InvalidArgument, "one noise spectrum per channel required");
  std::vector<double> out(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    auto spec = to_spectrum(x0.channel(c), shape);
    for (std::size_t k = 0; k < n; ++k)
      spec[k] = kern.decay[k] * spec[k] + std::sqrt(kern.variance[k]) * sqrt_n * noise[c][k];
    const auto vals = to_values(std::move(spec), shape);
    for (std::size_t i = 0; i < n; ++i) out[i * channels + c] = vals[i];
  }
  return x0.with_values(std::move(out));
}

GridFunction DiffusionProcess::forward_integrate(const GridFunction& x0, double t, Rng& rng,
                                                 std::size_t n_steps, IntegrateOptions options) const {
  if (n_steps == 0) throw Error(ErrorKind::StepCountZero, "forward_integrate needs n_steps >= 1");
  check_time(t);
  if (t == 0.0) return x0;
  const Shape shape = x0.shape();
  const auto w = weights(shape);
  const std::size_t n = x0.num_points();
  const std::size_t channels = x0.channels();
  const double dt = t / static_cast<double>(n_steps);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<std::vector<cplx>> state;
  for (std::size_t c = 0; c < channels; ++c) state.push_back(to_spectrum(x0.channel(c), shape));
  for (std::size_t step = 0; step < n_steps; ++step) {
    const double beta = schedule_.beta(static_cast<double>(step) * dt);
    for (std::size_t c = 0; c < channels; ++c) {
      auto& spec = state[c];
      if (options.noise_scale != 0.0) {
        const auto eps = hermitian_noise(shape, rng);
        for (std::size_t k = 0; k < n; ++k) {
          const double g = options.noise_scale * std::sqrt(w.r[k] * beta * dt) * sqrt_n;
          spec[k] += -w.b[k] * beta * dt * spec[k] + g * eps[k];
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) spec[k] += -w.b[k] * beta * dt * spec[k];
      }
    }
  }
  std::vector<double> out(n * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto vals = to_values(std::move(state[c]), shape);
    for (std::size_t i = 0; i < n; ++i) out[i * channels + c] = vals[i];
  }
  return x0.with_values(std::move(out));
}

}  // namespace fdp
