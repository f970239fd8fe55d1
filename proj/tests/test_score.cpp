#include <doctest.h>

#include <cmath>

#include "fdp/error.hpp"
#include "fdp/inr.hpp"
#include "fdp/score.hpp"
#include "oracles.hpp"

using namespace fdp;

namespace {

const std::size_t N = 8;

DiffusionProcess unit_process() {
  return DiffusionProcess::unchecked(OperatorSpectrum::uniform(1, N / 2, 1.0, 1.0), TimeSchedule::constant());
}

GridFunction from_spectrum(std::vector<cplx> c) {
  return GridFunction({Axis{N, 0, 1}}, 1, oracle::idft(c));
}

GridFunction random_grid(Rng& rng, std::size_t n = N) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return GridFunction({Axis{n, 0, 1}}, 1, v);
}

/// log N(F x; decay F x0, N s) summed over the spectrum, as a function of the grid values.
double log_density(const std::vector<double>& x, const GridFunction& x0, const PerturbationKernel& k) {
  const auto fx = oracle::dft(x), f0 = oracle::dft(x0.channel(0));
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc -= std::norm(fx[i] - k.decay[i] * f0[i]) / (2.0 * double(x.size()) * k.variance[i]);
  return acc;
}

std::vector<cplx> spectrum(const GridFunction& f) { return oracle::dft(f.channel(0)); }

}  // namespace

TEST_CASE("conditional score") {
  const auto proc = unit_process();
  const double s1 = (1 - std::exp(-2.0)) / 2;
  SUBCASE("vanishes at the conditional mean") {
    Rng rng(1, 0);
    const auto x0 = random_grid(rng);
    auto c = spectrum(x0);
    for (auto& v : c) v *= std::exp(-1.0);
    const auto score = conditional_score(from_spectrum(c), x0, 1.0, proc);
    for (double v : score.values()) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("single frequency plug-in") {
    std::vector<cplx> c0(N, 0.0), cx(N, 0.0);
    c0[1] = c0[N - 1] = 1.0;
    cx[1] = cx[N - 1] = 0.5;
    const auto score = spectrum(conditional_score(from_spectrum(cx), from_spectrum(c0), 1.0, proc));
    const double expect = -(0.5 - std::exp(-1.0)) / s1;
    CHECK(std::abs(score[1] - expect) < 1e-12);
    CHECK(std::abs(score[2]) < 1e-12);
  }
  SUBCASE("matches finite differences of the Gaussian log-density") {
    const auto toy = DiffusionProcess(OperatorSpectrum::toy1d(N / 2), TimeSchedule::constant());
    Rng rng(2, 0);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const double t = 0.05 + 0.95 * rng.uniform();
      const auto x0 = random_grid(rng), x = random_grid(rng);
      const auto kern = toy.kernel(x.shape(), t);
      const auto score = conditional_score(x, x0, t, toy);
      const double h = 1e-5;
      for (std::size_t i = 0; i < N; ++i) {
        auto xp = x.channel(0), xm = x.channel(0);
        xp[i] += h;
        xm[i] -= h;
        const double fd = (log_density(xp, x0, kern) - log_density(xm, x0, kern)) / (2 * h);
        worst = std::max(worst, std::abs(fd - score.value(i)));
      }
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("t = 0 is singular") {
    Rng rng(3, 0);
    const auto x = random_grid(rng);
    try {
      conditional_score(x, x, 0.0, proc);
      FAIL("expected SingularKernel");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingularKernel);
    }
  }
}

TEST_CASE("Gaussian true score") {
  const auto proc = unit_process();
  const std::vector<Axis> axes{Axis{N, 0, 1}};
  Rng rng(4, 0);
  const auto x = random_grid(rng);
  SUBCASE("degenerate prior reduces to the conditional score at x0 = 0") {
    const auto prior = GaussianPrior::zero_mean(axes, std::vector<double>(N, 0.0));
    const auto a = gaussian_true_score(x, 0.6, proc, prior);
    const auto b = conditional_score(x, GridFunction::zeros(axes), 0.6, proc);
    CHECK(oracle::max_abs_diff(a.values(), b.values()) < 1e-12);
  }
  SUBCASE("unit prior variance, b = r = 1, t = 1") {
    const auto prior = GaussianPrior::zero_mean(axes, std::vector<double>(N, 1.0));
    const auto score = spectrum(gaussian_true_score(x, 1.0, proc, prior));
    const auto fx = spectrum(x);
    const double d = std::exp(-1.0), s = (1 - std::exp(-2.0)) / 2;
    for (std::size_t k = 0; k < N; ++k) CHECK(std::abs(score[k] + fx[k] / (d * d + s)) < 1e-12);

    // Monte Carlo regression of X0 on X_t for one real coefficient: slope = E[X0 Xt] / E[Xt^2].
    Rng mc(5, 0);
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 1000000; ++i) {
      const double x0 = mc.normal();
      const double xt = d * x0 + std::sqrt(s) * mc.normal();
      sxy += x0 * xt;
      sxx += xt * xt;
    }
    const double slope = sxy / sxx;
    // score = -(x - d E[X0|x]) / s
    const double mc_coeff = -(1 - d * slope) / s;
    CHECK(mc_coeff == doctest::Approx(-1 / (d * d + s)).epsilon(0.01));
  }
  SUBCASE("large t forgets the prior") {
    const auto far = DiffusionProcess::unchecked(OperatorSpectrum::uniform(1, N / 2, 1.0, 1.0), TimeSchedule::constant(1.0, 20.0));
    const auto prior = GaussianPrior::zero_mean(axes, std::vector<double>(N, 3.0));
    const auto score = spectrum(gaussian_true_score(x, 1.0, far, prior));
    const auto fx = spectrum(x);
    for (std::size_t k = 0; k < N; ++k) CHECK(std::abs(score[k] + fx[k] / 0.5) < 1e-6 * (1 + std::abs(fx[k])));
  }
}

TEST_CASE("parametric score and gamma tilde") {
  const auto proc = unit_process();
  Rng rng(6, 0);
  const auto x = random_grid(rng), x0 = random_grid(rng);
  const Denoiser perfect = [&](const GridFunction&, double) { return x0; };
  const Denoiser null = [](const GridFunction& g, double) { return GridFunction::zeros(g.axes()); };

  SUBCASE("perfect denoiser reduces to the conditional score") {
    const auto a = parametric_score(x, 0.7, perfect, proc), b = conditional_score(x, x0, 0.7, proc);
    CHECK(oracle::max_abs_diff(a.values(), b.values()) < 1e-10);
    for (double v : gamma_tilde(x, x0, 0.7, perfect, proc).values()) CHECK(std::abs(v) < 1e-10);
  }
  SUBCASE("null denoiser") {
    const auto score = spectrum(parametric_score(x, 1.0, null, proc));
    const auto fx = spectrum(x);
    const double s = (1 - std::exp(-2.0)) / 2;
    for (std::size_t k = 0; k < N; ++k) CHECK(std::abs(score[k] + fx[k] / s) < 1e-10);

    std::vector<cplx> c0(N, 0.0);
    c0[1] = c0[N - 1] = 1.0;
    const auto g = spectrum(gamma_tilde(x, from_spectrum(c0), 1.0, null, proc));
    // +(decay / s)(F(denoised) - F(x0)) with denoised = 0.
    CHECK(std::abs(g[1] + std::exp(-1.0) / s) < 1e-10);
  }
  SUBCASE("gamma tilde is the parametric minus the conditional score for random nets") {
    InrArchitecture arch;
    arch.hidden_layers = 2;
    arch.width = 16;
    arch.time_embedding = 4;
    arch.skip = InrArchitecture::skip_every(2, 2);
    for (int trial = 0; trial < 5; ++trial) {
      Rng init(7, trial);
      const auto net = InrNetwork::initialize(arch, init);
      const Denoiser den = make_denoiser(net);
      const auto xr = random_grid(rng), x0r = random_grid(rng);
      const double t = 0.1 + 0.8 * rng.uniform();
      const auto ps = parametric_score(xr, t, den, proc);
      const auto cs = conditional_score(xr, x0r, t, proc);
      const auto gt = gamma_tilde(xr, x0r, t, den, proc);
      for (std::size_t i = 0; i < N; ++i) CHECK(std::abs(gt.value(i) - (ps.value(i) - cs.value(i))) < 1e-10);
      for (double v : ps.values()) CHECK(std::isfinite(v));
      CHECK(ps.same_grid(xr));
    }
  }
}

TEST_CASE("mixture posterior mean reduces to the Gaussian one for a single component") {
  const auto proc = DiffusionProcess(OperatorSpectrum::toy1d(N / 2), TimeSchedule::constant());
  const std::vector<Axis> axes{Axis{N, 0, 1}};
  std::vector<double> var(N);
  for (std::size_t k = 0; k < N; ++k) var[k] = 0.2 + 0.1 * double(std::abs(signed_frequency(k, N)));
  const auto prior = GaussianPrior::zero_mean(axes, var);
  Rng rng(8, 0);
  const auto x = random_grid(rng);
  const GaussianMixturePrior mix{{prior}, {1.0}};
  const auto den = mixture_posterior_mean(x, 0.4, proc, mix);
  const auto via_mix = parametric_score(x, 0.4, [&](const GridFunction&, double) { return den; }, proc);
  const auto exact = gaussian_true_score(x, 0.4, proc, prior);
  CHECK(oracle::max_abs_diff(via_mix.values(), exact.values()) < 1e-10);
}
