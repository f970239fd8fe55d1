// End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fdp/config.hpp"
#include "fdp/data.hpp"
#include "fdp/error.hpp"
#include "fdp/reconstruct.hpp"
#include "fdp/sampler.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

using namespace fdp;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TimeSchedule linear_schedule() {
  TimeSchedule s;
  s.kind = TimeSchedule::Kind::Linear;
  s.beta_min = 0.1;
  s.beta_max = 19.9;
  return s;
}

GaussianPrior harmonic_prior(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / (1.0 + std::abs(double(signed_frequency(i, n))));
  return GaussianPrior::zero_mean({Axis{n, 0.0, 1.0}}, v);
}

// 1: Gaussian prior, analytic score, reverse sampling.
Outcome gaussian_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 32, chains = 10000;
  const DiffusionProcess proc(OperatorSpectrum::toy1d(16), linear_schedule());
  const auto prior = harmonic_prior(n);
  SamplerConfig cfg;
  cfg.n_steps = 500;
  cfg.t_min = 1e-3;
  const auto samples = sample_chains(make_gaussian_score(proc, prior), proc, prior.axes, 1, cfg, chains, 101);
  const auto stats = frequency_statistics(samples);
  const auto kern = proc.kernel({n}, cfg.t_min);
  double var_err = 0, mean_z = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = kern.decay[k] * kern.decay[k] * prior.variance[k] + kern.variance[k];
    var_err = std::max(var_err, std::abs(stats.variance[k] / target - 1));
    const bool real_bin = conjugate_index(k, {n}) == k;
    const double se = std::sqrt(double(n) * target / double(chains) / (real_bin ? 1.0 : 2.0));
    mean_z = std::max({mean_z, std::abs(stats.mean[k].real()) / se, real_bin ? 0.0 : std::abs(stats.mean[k].imag()) / se});
  }
  const double secs = seconds_since(t0);
  return {var_err <= 0.05 && mean_z <= 3.0 && secs < 120,
          fmt("max variance error %.2f%% (tol 5%%), max |mean|/SE %.2f (tol 3), %.1f s (limit 120)", 100 * var_err,
              mean_z, secs)};
}

// 2: per-frequency linear fit of the conditional objective vs the analytic marginal score.
// The fit's relative standard error is sqrt(decay^2 v0 / (s n_eff)), which grows without bound as t -> 0;
// the times below keep it under 0.7% so a 2% bar is a test of bias, not of luck.
Outcome score_matching() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 32, draws = 100000;
  const DiffusionProcess proc(OperatorSpectrum::toy1d(16), linear_schedule());
  const auto prior = harmonic_prior(n);
  double worst = 0, worst_se = 0;
  std::string where;
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    Rng rng(202, std::uint64_t(t * 1000));
    const auto theta = fit_linear_score(proc, prior, t, draws, rng);
    const auto kern = proc.kernel({n}, t);
    for (std::size_t k = 0; k < n; ++k) {
      const double signal = kern.decay[k] * kern.decay[k] * prior.variance[k];
      const double exact = -1.0 / (signal + kern.variance[k]);
      const double n_eff = double(draws) * (conjugate_index(k, {n}) == k ? 1.0 : 2.0);
      worst_se = std::max(worst_se, std::sqrt(signal / kern.variance[k] / n_eff));
      const double e = std::abs(theta[k] / exact - 1);
      if (e > worst) worst = e, where = fmt("t=%.2f k=%ld", t, signed_frequency(k, n));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.02 && secs < 60,
          fmt("max coefficient error %.2f%% at %s (tol 2%%; largest predicted standard error %.2f%%), 1e5 samples per "
              "t, %.1f s (limit 60)",
              100 * worst, where.c_str(), 100 * worst_se, secs)};
}

// 3: reverse-mode gradients vs central differences.
Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(303, 0);
  double worst = 0;
  std::string parts;
  for (const auto& p : gradcheck::primitives()) {
    double w = 0;
    for (int i = 0; i < 50; ++i) w = std::max(w, p.instance(rng));
    worst = std::max(worst, w);
    parts += fmt("%s%s %.1e", parts.empty() ? "" : ", ", p.name.c_str(), w);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 60, fmt("50 instances each: %s (tol 1e-3), %.1f s (limit 60)", parts.c_str(), secs)};
}

// 4: closed-form forward kernel vs Euler-Maruyama paths.
Outcome forward_law() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t paths = 10000, n = 100;
  const DiffusionProcess proc(OperatorSpectrum::toy1d(50), TimeSchedule::constant());
  QuadraticDatasetSpec spec;
  Rng draw(404, 0);
  const auto x0 = quadratic_sample(spec, 1.0, draw);
  std::vector<GridFunction> closed, em;
  for (std::size_t i = 0; i < paths; ++i) {
    Rng a(405, i), b(406, i);
    closed.push_back(proc.forward_sample(x0, 1.0, a));
    em.push_back(proc.forward_integrate(x0, 1.0, b, 1000));
  }
  const auto kern = proc.kernel({n}, 1.0);
  const auto c0 = forward_transform(x0);
  // First moment relative to the coefficient's RMS, second moment E|C|^2 relative to itself (unitary units).
  auto errors = [&](const std::vector<GridFunction>& xs) {
    std::vector<std::vector<cplx>> spectra;
    for (const auto& x : xs) {
      const auto c = forward_transform(x);
      spectra.emplace_back(c.coeffs().begin(), c.coeffs().end());
    }
    double m1 = 0, m2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx mean = 0;
      double second = 0;
      for (const auto& s : spectra) mean += s[k], second += std::norm(s[k]);
      mean /= double(xs.size());
      second /= double(xs.size()) * double(n);
      const cplx exact_mean = kern.decay[k] * c0.coeff(k);
      const double exact_second = std::norm(exact_mean) / double(n) + kern.variance[k];
      m1 = std::max(m1, std::abs(mean - exact_mean) / std::sqrt(double(n) * exact_second));
      m2 = std::max(m2, std::abs(second / exact_second - 1));
    }
    return std::pair{m1, m2};
  };
  const auto [cm1, cm2] = errors(closed);
  const auto [em1, em2] = errors(em);
  const double worst = std::max({cm1, cm2, em1, em2});
  return {worst <= 0.03, fmt("vs the kernel law: closed form mean %.2f%% second %.2f%%, Euler-Maruyama (1000 steps) mean "
                             "%.2f%% second %.2f%% (tol 3%%), %zu paths, %.1f s",
                             100 * cm1, 100 * cm2, 100 * em1, 100 * em2, paths, seconds_since(t0))};
}

// 5 and 9 share the trained toy model.
struct ToyRun {
  RunConfig cfg;
  std::optional<InrNetwork> net;
  std::vector<StepMetrics> metrics;
  std::vector<GridFunction> samples;
  double train_seconds = 0;
  double sample_seconds = 0;
};

ToyRun& toy_run() {
  static std::optional<ToyRun> run;
  if (run) return *run;
  run.emplace();
  run->cfg = load_config(std::filesystem::path(FDP_CONFIG_DIR) / "toy1d.yaml");
  const auto& cfg = run->cfg;
  const auto arch = network_architecture(cfg);
  const auto proc = make_process(cfg);
  const auto data = load_training_data(cfg);
  auto t0 = std::chrono::steady_clock::now();
  if (const char* ckpt = std::getenv("FDP_TOY_CHECKPOINT")) {
    std::printf("  (toy model loaded from %s)\n", ckpt);
    run->net = load_checkpoint(ckpt, arch).net;
  } else {
    auto state = initial_state(arch, cfg.train);
    TrainHooks hooks;
    const std::uint64_t every = std::max<std::uint64_t>(1, cfg.train.steps / 10);
    hooks.on_step = [&](const StepMetrics& m) {
      if (m.step % every == 0) std::printf("  toy train step %llu loss %.4g\n", (unsigned long long)m.step, m.loss), std::fflush(stdout);
    };
    run->metrics = train(state, data, proc, cfg.train, hooks);
    run->net = state.net;
  }
  run->train_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto den = make_denoiser(*run->net);
  run->samples = sample_chains(make_parametric_score(proc, den), proc, data.front().axes(), 1, cfg.sampler,
                               cfg.sample_count, cfg.sample_seed, cfg.sampler.denoise_final ? &den : nullptr);
  run->sample_seconds = seconds_since(t0);
  return *run;
}

double window_mean(const std::vector<StepMetrics>& m, std::size_t end, std::size_t width) {
  double s = 0;
  for (std::size_t i = end - width; i < end; ++i) s += m[i].loss;
  return s / double(width);
}

Outcome toy_generation() {
  auto& run = toy_run();
  const auto s = summarize_quadratic(run.samples);
  const bool ok = run.samples.size() >= 512 && s.accepted >= 0.8 && s.positive_fraction >= 0.3 &&
                  s.negative_fraction >= 0.3 && run.cfg.train.steps <= 20000;
  std::string smoke = "n/a (checkpoint loaded)";
  if (run.metrics.size() >= 2000) {
    const double first = window_mean(run.metrics, 100, 100), at2k = window_mean(run.metrics, 2000, 100);
    smoke = fmt("%.3g -> %.3g (%.0f%% of start)", first, at2k, 100 * at2k / first);
  }
  return {ok, fmt("%zu samples: accepted %.1f%% (tol >= 80%%), q>0 %.1f%%, q<0 %.1f%% (tol >= 30%% each), in band "
                  "%.1f%%, mean residual mse %.3f; %llu steps in %.0f s, sampling %.0f s; loss mean steps 1-100 vs "
                  "1901-2000: %s",
                  run.samples.size(), 100 * s.accepted, 100 * s.positive_fraction, 100 * s.negative_fraction,
                  100 * s.in_band, s.mean_residual_mse, (unsigned long long)run.cfg.train.steps, run.train_seconds,
                  run.sample_seconds, smoke.c_str())};
}

// 6: band-limited reconstruction and the error decomposition bound.
Outcome sampling_theorem() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(606, 0);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.next_u64() % 198;
    const std::size_t nu = rng.next_u64() % ((n - 1) / 2 + 1);
    const double lo = rng.uniform(-2, 0), hi = lo + rng.uniform(0.5, 4);
    std::vector<double> a(nu + 1), b(nu + 1);
    for (std::size_t k = 0; k <= nu; ++k) a[k] = rng.normal(), b[k] = k ? rng.normal() : 0.0;
    auto f = [&](double x) {
      double s = 0;
      for (std::size_t k = 0; k <= nu; ++k) {
        const double w = 2 * pi * double(k) * (x - lo) / (hi - lo);
        s += a[k] * std::cos(w) + b[k] * std::sin(w);
      }
      return s;
    };
    const auto samples = GridFunction::sample_1d(Axis{n, lo, hi}, f);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(lo, hi)});
    const auto r = reconstruct_from_samples(samples, double(nu), pts);
    for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, std::abs(r[i] - f(pts[i][0])));
  }
  int holds = 0;
  double ratio = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::size_t(4) << (rng.next_u64() % 5);
    const std::size_t m = n * (8 + 8 * (rng.next_u64() % 2));
    const double slope = rng.uniform(0.5, 2.5), kink = rng.uniform(-1, 1);
    std::vector<double> a(m / 2), ph(m / 2);
    for (std::size_t k = 0; k < m / 2; ++k) a[k] = rng.normal() / std::pow(1.0 + double(k), slope), ph[k] = rng.uniform(0, 2 * pi);
    const auto ref = GridFunction::sample_1d(Axis{m, -1, 1}, [&](double x) {
      double s = 0.3 * std::abs(x - kink);
      for (std::size_t k = 0; k < m / 2; ++k) s += a[k] * std::cos(pi * double(k) * x + ph[k]);
      return s;
    });
    const double nu = double(1 + rng.next_u64() % n);
    const auto e = error_decomposition(ref, {n}, nu);
    holds += e.bound_holds && e.total <= e.eps1 + e.eps2 + e.eps3 + 1e-9 * std::max(1.0, l2_norm(ref));
    ratio = std::max(ratio, e.total / (e.eps1 + e.eps2 + e.eps3));
  }
  return {worst < 1e-9 && holds == 200,
          fmt("200 band-limited functions: max error %.2e (tol 1e-9); bound holds on %d/200 rough functions (max "
              "total/(e1+e2+e3) %.3f), %.1f s",
              worst, holds, ratio, seconds_since(t0))};
}

// 7: spectral identities on random inputs.
Outcome spectral_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(707, 0);
  auto random_grid = [&](bool two_d) {
    std::vector<Axis> axes{Axis{2 + rng.next_u64() % (two_d ? 23 : 299), 0, 1}};
    if (two_d) axes.push_back(Axis{2 + rng.next_u64() % 23, 0, 1});
    std::vector<double> v(num_points(axes));
    for (auto& x : v) x = rng.normal();
    return GridFunction(axes, 1, v);
  };
  double parseval = 0, herm = 0, round = 0, drift = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = random_grid(i % 4 == 0);
    const auto c = forward_transform(f);
    double ev = 0, es = 0, cmax = 0, vmax = 0;
    for (double v : f.values()) ev += v * v, vmax = std::max(vmax, std::abs(v));
    for (auto z : c.coeffs()) es += std::norm(z), cmax = std::max(cmax, std::abs(z));
    parseval = std::max(parseval, std::abs(ev - es / double(f.num_points())) / ev);
    herm = std::max(herm, c.hermitian_residue() / cmax);
    const auto back = inverse_transform(c);
    round = std::max(round, oracle::max_abs_diff(back.values(), f.values()) / vmax);
  }
  // Drift on the continuous interpolant (4x finer grid, direct DFT) sampled at the grid
  // equals the drift applied to the grid's own coefficients.
  const auto spectrum = OperatorSpectrum::toy1d(50);
  const DiffusionProcess proc(spectrum, TimeSchedule::constant());
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 63, m = 4 * n;
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    const GridFunction f({Axis{n, 0, 1}}, 1, v);
    const auto b = proc.weights({n}).b;
    auto fine = oracle::dft(resample(f, {m}).channel(0));
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t ak = std::size_t(std::abs(signed_frequency(k, m)));
      fine[k] *= ak <= n / 2 ? b[frequency_position(long(ak), n)] : 0.0;
    }
    const auto lhs = oracle::idft(fine);
    auto cx = oracle::dft(v);
    for (std::size_t k = 0; k < n; ++k) cx[k] *= b[k];
    const auto rhs = oracle::idft(cx);
    double scale = 0, diff = 0;
    for (std::size_t p = 0; p < n; ++p) diff = std::max(diff, std::abs(lhs[4 * p] - rhs[p])), scale = std::max(scale, std::abs(rhs[p]));
    drift = std::max(drift, diff / std::max(scale, 1e-300));
  }
  const bool ok = parseval < 1e-12 && herm < 1e-12 && round < 1e-12 && drift < 1e-10;
  return {ok, fmt("1000 inputs each: Parseval %.1e, Hermitian residue %.1e, round trip %.1e (tol 1e-12 relative), drift "
                  "projection %.1e (tol 1e-10), %.1f s",
                  parseval, herm, round, drift, seconds_since(t0))};
}

// 8: bitwise reproducibility of training and sampling, and of resuming from a checkpoint.
Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  setenv("FDP_THREADS", "1", 1);
  auto cfg = load_config(std::filesystem::path(FDP_CONFIG_DIR) / "toy1d.yaml");
  cfg.train.steps = 100;
  const auto arch = network_architecture(cfg);
  const auto proc = make_process(cfg);
  const auto data = load_training_data(cfg);
  auto session = [&] {
    auto state = initial_state(arch, cfg.train);
    train(state, data, proc, cfg.train);
    const auto den = make_denoiser(state.net);
    auto samples = sample_chains(make_parametric_score(proc, den), proc, data.front().axes(), 1, cfg.sampler, 16, 5);
    return std::pair{state.net.parameters(), std::move(samples)};
  };
  const auto [pa, sa] = session();
  const auto [pb, sb] = session();
  bool same_params = pa == pb, same_samples = true;
  for (std::size_t i = 0; i < sa.size(); ++i) same_samples = same_samples && std::ranges::equal(sa[i].values(), sb[i].values());

  const auto dir = std::filesystem::temp_directory_path() / "fdp_acceptance_resume";
  std::filesystem::remove_all(dir);
  auto half = cfg.train;
  half.steps = 50;
  auto first = initial_state(arch, cfg.train);
  TrainHooks hooks;
  hooks.checkpoint_dir = dir;
  train(first, data, proc, half, hooks);
  auto resumed = load_checkpoint(dir / "checkpoint-last.fdpc", arch);
  train(resumed, data, proc, cfg.train);
  std::filesystem::remove_all(dir);
  const bool same_resume = resumed.net.parameters() == pa;
  return {same_params && same_samples && same_resume,
          fmt("two runs of train(100)+sample(16): parameters %s, samples %s; resume at step 50: %s, %.1f s",
              same_params ? "identical" : "DIFFER", same_samples ? "identical" : "DIFFER",
              same_resume ? "identical" : "DIFFERS", seconds_since(t0))};
}

// 9: the 2x evaluation keeps the 1x output's spectral energy on the shared band.
Outcome super_resolution() {
  auto& run = toy_run();
  const std::size_t count = std::min<std::size_t>(64, run.samples.size());
  const std::size_t n = run.samples.front().num_points(), m = 2 * n;
  const double t = run.cfg.sampler.t_min;
  std::vector<double> e1(n, 0.0), e2(n, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c1 = forward_transform(super_resolve(*run.net, run.samples[i], {n}, t));
    const auto c2 = forward_transform(super_resolve(*run.net, run.samples[i], {m}, t));
    for (std::size_t k = 0; k < n; ++k) {
      const long sk = signed_frequency(k, n);
      e1[k] += std::norm(c1.coeff(k)) / double(n * n * count);
      e2[k] += std::norm(c2.coeff(frequency_position(sk, m))) / double(m * m * count);
    }
  }
  const double peak = *std::max_element(e1.begin(), e1.end());
  double worst = 0;
  long at = 0;
  std::size_t band = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const long sk = signed_frequency(k, n);
    if (std::size_t(std::abs(sk)) * 2 >= n || e1[k] < 1e-6 * peak) continue;
    ++band;
    const double e = std::abs(e2[k] / e1[k] - 1);
    if (e > worst) worst = e, at = sk;
  }
  return {worst <= 0.05, fmt("%zu samples, %zu retained frequencies (|k| < N/2, energy >= 1e-6 of peak): max relative "
                             "energy change %.2f%% at k=%ld (tol 5%%)",
                             count, band, 100 * worst, at)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"gaussian-oracle", gaussian_oracle}},     {2, {"score-matching", score_matching}},
      {3, {"gradient-suite", gradient_suite}},       {4, {"forward-law", forward_law}},
      {5, {"toy-generation", toy_generation}},       {6, {"sampling-theorem", sampling_theorem}},
      {7, {"spectral-identities", spectral_identities}}, {8, {"determinism", determinism}},
      {9, {"super-resolution", super_resolution}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, _] : criteria) selected.push_back(id);
  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, it->second.first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
