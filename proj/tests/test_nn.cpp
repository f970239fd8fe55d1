#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "fdp/data.hpp"
#include "fdp/error.hpp"
#include "fdp/train.hpp"
#include "gradient_suite.hpp"

using namespace fdp;

namespace {

InrArchitecture small_arch(Activation act = Activation::Sine) {
  InrArchitecture a;
  a.hidden_layers = 3;
  a.width = 16;
  a.time_embedding = 4;
  a.activation = act;
  a.skip = InrArchitecture::skip_every(3, 2);
  return a;
}

GridFunction random_grid(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return GridFunction({Axis{n, -1, 1}}, 1, v);
}

}  // namespace

TEST_CASE("network evaluation") {
  Rng rng(1, 0);
  SUBCASE("zero output layer gives the zero function") {
    auto net = InrNetwork::initialize(small_arch(), rng);
    auto p = net.parameters();
    p[p.size() - 2].setZero();
    p.back().setZero();
    const auto x = random_grid(rng, 12);
    const auto out = denoise(net.with_parameters(p), x, 0.3);
    for (double v : out.values()) CHECK(v == 0.0);
  }
  SUBCASE("pointwise: shuffled query order gives the same per-point values") {
    const auto net = InrNetwork::initialize(small_arch(), rng);
    const auto x = random_grid(rng, 12);
    const auto psi = modulate(net, x, 0.3);
    const ad::Matrix coords = grid_coords(x), cond = grid_values(x);
    std::vector<Eigen::Index> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
    ad::Matrix pc(12, 1), pv(12, 1);
    for (Eigen::Index i = 0; i < 12; ++i) {
      pc(i, 0) = coords(perm[i], 0);
      pv(i, 0) = cond(perm[i], 0);
    }
    const auto a = eval(net, psi, 0.3, coords, cond), b = eval(net, psi, 0.3, pc, pv);
    for (Eigen::Index i = 0; i < 12; ++i) CHECK(b(i, 0) == a(perm[i], 0));
  }
  SUBCASE("Jacobian with respect to the modulation matches finite differences") {
    for (auto act : {Activation::Sine, Activation::Gabor}) {
      const auto arch = small_arch(act);
      const auto net = InrNetwork::initialize(arch, rng);
      const auto x = random_grid(rng, 10);
      const ad::Matrix inputs = build_inputs(arch, grid_coords(x), grid_values(x), 0.4);
      const ad::Matrix proj = gradcheck::random_matrix(rng, 10, 1);
      std::vector<ad::Matrix> psi0;
      for (std::size_t l = 0; l < arch.hidden_layers; ++l) psi0.push_back(gradcheck::random_matrix(rng, 1, 16, 0.01));
      std::vector<ad::Var> params;
      for (const auto& m : net.parameters()) params.push_back(ad::constant(m));
      const double err = gradcheck::relative_error(
          [&](std::span<const ad::Var> psi) {
            return gradcheck::project(forward(arch, params, psi, ad::constant(inputs)), proj);
          },
          psi0);
      CHECK(err < 1e-3);
    }
  }
  SUBCASE("outputs stay bounded on a dense grid") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto arch = small_arch();
      const auto net = InrNetwork::initialize(arch, rng);
      // |sin| <= 1 and every skip adds at most one more unit-bounded term.
      const auto& w = net.parameters()[2 * arch.hidden_layers];
      const double cap = w.cwiseAbs().sum() * double(arch.hidden_layers) + net.parameters().back().cwiseAbs().sum();
      const auto x = random_grid(rng, 1000);
      const auto out = denoise(net, x, rng.uniform());
      for (double v : out.values()) CHECK(std::abs(v) <= cap);
    }
  }
}

TEST_CASE("modulation") {
  Rng rng(2, 0);
  SUBCASE("zero inner steps leave psi at zero") {
    auto arch = small_arch();
    arch.inner_steps = 0;
    const auto net = InrNetwork::initialize(arch, rng);
    for (const auto& m : modulate(net, random_grid(rng, 8), 0.5)) CHECK(m.isZero(0.0));
  }
  SUBCASE("a net that already reproduces the input keeps psi at zero") {
    auto net = InrNetwork::initialize(small_arch(), rng);
    auto p = net.parameters();
    p[p.size() - 2].setZero();
    p.back().setConstant(0.7);
    const auto x = GridFunction::sample_1d(Axis{8, -1, 1}, [](double) { return 0.7; });
    for (const auto& m : modulate(net.with_parameters(p), x, 0.5)) CHECK(m.isZero(0.0));
  }
  SUBCASE("inner fit loss is non-increasing on the toy task below the measured lr threshold") {
    InrArchitecture arch;
    arch.skip = InrArchitecture::skip_every(8, 2);
    arch.inner_lr = 1e-2;
    const auto net = InrNetwork::initialize(arch, rng);
    QuadraticDatasetSpec spec;
    spec.count = 8;
    const auto data = generate_quadratic(spec);
    const auto proc = DiffusionProcess(OperatorSpectrum::toy1d(50), TimeSchedule::constant());
    for (const auto& x0 : data) {
      const auto xt = proc.forward_sample(x0, rng.uniform(0.01, 1.0), rng);
      const auto trace = modulation_trace(net, xt, 0.3);
      REQUIRE(trace.size() == 4);
      for (std::size_t s = 1; s < trace.size(); ++s) CHECK(trace[s] <= trace[s - 1]);
    }
  }
  SUBCASE("denoise output shapes") {
    const auto net = InrNetwork::initialize(small_arch(), rng);
    const auto x = random_grid(rng, 12);
    CHECK(denoise(net, x, 0.2).same_grid(x));
    const auto fine = denoise_at(net, x, 0.2, {24});
    CHECK(fine.num_points() == 24);
    CHECK(fine.axes()[0].lo == x.axes()[0].lo);
  }
}

TEST_CASE("autodiff primitives match finite differences") {
  Rng rng(3, 0);
  for (const auto& p : gradcheck::primitives()) {
    double worst = 0;
    for (int i = 0; i < 5; ++i) worst = std::max(worst, p.instance(rng));
    INFO(p.name);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("tape purity: repeated passes give identical gradients") {
  Rng rng(4, 0);
  const auto arch = small_arch();
  const auto net = InrNetwork::initialize(arch, rng);
  const auto proc = DiffusionProcess(OperatorSpectrum::toy1d(4), TimeSchedule::constant());
  const auto x0 = random_grid(rng, 8);
  const auto draw = draw_element(x0, proc, ObjectiveConfig{}, 1, 0, 0);
  auto run = [&] {
    const auto params = parameter_vars(net);
    return ad::grad_values(element_loss(arch, params, x0, draw, proc, LossWeighting::Elbo), params);
  };
  const auto a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("optimizer") {
  SUBCASE("warm-up then cosine decay") {
    LrSchedule s{1e-3, 10, 110, 1e-5};
    CHECK(s.at(1) == doctest::Approx(1e-4));
    CHECK(s.at(10) == doctest::Approx(1e-3));
    CHECK(s.at(60) == doctest::Approx(1e-5 + (1e-3 - 1e-5) * 0.5));
    CHECK(s.at(110) == doctest::Approx(1e-5));
    CHECK(s.at(500) == doctest::Approx(1e-5));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    Optimizer opt;
    std::vector<ad::Matrix> p{ad::Matrix::Constant(2, 3, 0.5)}, g{ad::Matrix::Zero(2, 3)};
    opt.apply(p, g);
    CHECK(p[0] == ad::Matrix::Constant(2, 3, 0.5));
  }
  SUBCASE("AdaBelief matches a scalar reference") {
    OptimizerConfig cfg;
    cfg.schedule.base_lr = 0.1;
    cfg.clip_norm = 0;
    Optimizer opt(cfg);
    std::vector<ad::Matrix> p{ad::Matrix::Constant(1, 1, 1.0)};
    double x = 1.0, m = 0, s = 0;
    for (int step = 1; step <= 5; ++step) {
      const double g = 2 * x - 0.3 * step;
      std::vector<ad::Matrix> gm{ad::Matrix::Constant(1, 1, g)};
      opt.apply(p, gm);
      m = 0.9 * m + 0.1 * g;
      s = 0.999 * s + 0.001 * (g - m) * (g - m) + 1e-16;
      const double mh = m / (1 - std::pow(0.9, step)), sh = s / (1 - std::pow(0.999, step));
      x -= 0.1 * mh / (std::sqrt(sh) + 1e-16);
      CHECK(p[0](0, 0) == doctest::Approx(x).epsilon(1e-12));
    }
  }
  SUBCASE("global-norm clipping and non-finite gradients") {
    Optimizer opt;
    std::vector<ad::Matrix> p{ad::Matrix::Zero(1, 2)}, g{ad::Matrix::Constant(1, 2, 3.0)};
    const auto u = opt.apply(p, g);
    CHECK(u.clipped);
    CHECK(u.grad_norm == doctest::Approx(std::sqrt(18.0)));
    CHECK(global_norm(g) == doctest::Approx(1.0));
    std::vector<ad::Matrix> bad{ad::Matrix::Constant(1, 2, std::nan(""))};
    CHECK_THROWS_AS(opt.apply(p, bad), Error);
  }
}

TEST_CASE("training: determinism, checkpoints and overfitting one sample") {
  const auto proc = DiffusionProcess(OperatorSpectrum::toy1d(8), TimeSchedule::constant());
  Rng rng(5, 0);
  std::vector<GridFunction> data;
  for (int i = 0; i < 6; ++i) data.push_back(random_grid(rng, 16));
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 3;
  cfg.objective.t_min = 0.05;
  cfg.optimizer.schedule.base_lr = 1e-3;
  const auto arch = small_arch();

  SUBCASE("ten steps are bitwise reproducible") {
    auto a = initial_state(arch, cfg), b = initial_state(arch, cfg);
    train(a, data, proc, cfg);
    train(b, data, proc, cfg);
    for (std::size_t i = 0; i < a.net.parameters().size(); ++i) CHECK(a.net.parameters()[i] == b.net.parameters()[i]);
  }
  SUBCASE("checkpoint round trip and resume") {
    const auto dir = std::filesystem::temp_directory_path() / "fdp_test_ckpt";
    std::filesystem::remove_all(dir);
    auto full = initial_state(arch, cfg);
    train(full, data, proc, cfg);

    TrainConfig half = cfg;
    half.steps = 5;
    auto first = initial_state(arch, cfg);
    TrainHooks hooks;
    hooks.checkpoint_dir = dir;
    train(first, data, proc, half, hooks);
    auto resumed = load_checkpoint(dir / "checkpoint-last.fdpc", arch);
    CHECK(resumed.step == 5);
    train(resumed, data, proc, cfg);
    for (std::size_t i = 0; i < full.net.parameters().size(); ++i)
      CHECK(full.net.parameters()[i] == resumed.net.parameters()[i]);

    auto other = arch;
    other.width = 8;
    try {
      load_checkpoint(dir / "checkpoint-last.fdpc", other);
      FAIL("expected CheckpointMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CheckpointMismatch);
    }
    std::filesystem::remove_all(dir);
  }
  SUBCASE("a net trained on one function denoises it below the noise level") {
    const auto x0 = GridFunction::sample_1d(Axis{16, -1, 1}, [](double p) { return p * p - 0.3; });
    TrainConfig one = cfg;
    one.steps = 400;
    one.batch_size = 4;
    one.objective.weighting = LossWeighting::Denoiser;
    one.objective.t_max = 0.5;
    one.optimizer.schedule = {1e-3, 20, 400, 1e-4};
    auto state = initial_state(arch, one);
    train(state, {x0}, proc, one);
    const double t = 0.3;
    const auto kern = proc.kernel({16}, t);
    const double s_bar = std::accumulate(kern.variance.begin(), kern.variance.end(), 0.0) / 16;
    double mse = 0;
    for (int i = 0; i < 10; ++i) {
      const auto d = denoise(state.net, proc.forward_sample(x0, t, rng), t);
      for (std::size_t p = 0; p < 16; ++p) mse += std::pow(d.value(p) - x0.value(p), 2) / 160;
    }
    CHECK(mse < s_bar);
  }
}
