#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "fdp/config.hpp"
#include "fdp/error.hpp"
#include "fdp/grid_io.hpp"
#include "fdp/reconstruct.hpp"
#include "json.hpp"
#include "svg.hpp"

#ifndef FDP_VERSION
#define FDP_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace fdp::cli {
namespace {

enum Exit { Ok = 0, Failure = 1, ConfigError = 2, NumericalAbort = 3 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::InvalidSpectrum:
    case ErrorKind::InvalidTime:
    case ErrorKind::StepCountZero:
    case ErrorKind::InvalidArgument:
    case ErrorKind::CutoffAboveNyquist:
    case ErrorKind::ReferenceTooCoarse:
    case ErrorKind::MaskShapeMismatch:
      return ConfigError;
    case ErrorKind::NonFiniteGradient:
    case ErrorKind::NonFiniteState:
    case ErrorKind::SingularKernel:
      return NumericalAbort;
    default:
      return Failure;
  }
}

struct Common {
  std::string config;
  std::vector<std::string> set;
  std::string out;

  RunConfig load() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    apply_overrides(c, set);
    if (!out.empty()) c.output_dir = out;
    return c;
  }
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("config", c.config, "run config (YAML)");
  if (config_required) opt->required();
  app->add_option("--set", c.set, "override, section.key=value (repeatable)");
  app->add_option("--out", c.out, "run directory (overrides output.dir)");
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream o(p);
  if (!o) throw Error(ErrorKind::Io, "cannot write " + p.string());
  o << s;
}

fs::path checkpoint_path(const RunConfig& cfg, const std::string& explicit_path) {
  return explicit_path.empty() ? fs::path(cfg.output_dir) / "checkpoints" / "checkpoint-last.fdpc"
                               : fs::path(explicit_path);
}

/// Grid of the training corpus, used to place generated samples.
GridFunction grid_template(const RunConfig& cfg) {
  if (cfg.dataset.kind == "quadratic") {
    QuadraticDatasetSpec one = cfg.dataset.quadratic;
    one.count = 1;
    return generate_quadratic(one).front();
  }
  return load_training_data(cfg).front();
}

void print_report(const ValidationReport& r) {
  for (const auto& c : r.checks) std::cout << (c.passed ? "  ok    " : "  FAIL  ") << c.name << ": " << c.detail << "\n";
}

int cmd_validate(const Common& c) {
  const RunConfig cfg = c.load();
  const auto report = validate_spectrum(cfg.spectrum.build());
  print_report(report);
  cfg.schedule.validate();
  if (!report.ok()) {
    std::cerr << "spectrum rejected\n";
    return ConfigError;
  }
  return Ok;
}

int cmd_train(const Common& c, bool resume) {
  const RunConfig cfg = c.load();
  const auto report = validate_spectrum(cfg.spectrum.build());
  if (!report.ok()) {
    print_report(report);
    throw Error(ErrorKind::InvalidSpectrum, "refusing to train on an invalid spectrum");
  }
  const DiffusionProcess process = make_process(cfg);
  cfg.sampler.validate(process.horizon());
  const auto data = load_training_data(cfg);
  if (data.empty()) throw Error(ErrorKind::EmptyBatch, "training set is empty");
  const InrArchitecture arch = network_architecture(cfg);
  if (data.front().channels() != arch.channels || data.front().axes().size() != arch.coord_dims)
    throw Error(ErrorKind::Config, "network.channels / network.coord_dims do not match the dataset");

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir / "checkpoints");
  write_text(dir / "config.yaml", to_yaml(cfg));
  write_text(dir / "version.txt", std::string(FDP_VERSION) + "\n");

  const fs::path last = dir / "checkpoints" / "checkpoint-last.fdpc";
  TrainState state = resume && fs::exists(last) ? load_checkpoint(last, arch) : initial_state(arch, cfg.train);
  if (resume) std::cout << "resuming at step " << state.step << "\n";
  std::ofstream log(dir / "metrics.jsonl", resume ? std::ios::app : std::ios::trunc);

  TrainHooks hooks;
  hooks.log = &log;
  hooks.checkpoint_dir = dir / "checkpoints";
  double avg = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  hooks.on_step = [&](const StepMetrics& m) {
    avg = avg == 0.0 ? m.loss : 0.98 * avg + 0.02 * m.loss;
    const std::uint64_t every = std::max<std::uint64_t>(1, cfg.train.steps / 20);
    if (m.step % every == 0 || m.step == cfg.train.steps) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("step %llu  loss(avg) %.5g  grad_norm %.3g  lr %.3g  %.0fs\n",
                  static_cast<unsigned long long>(m.step), avg, m.grad_norm, m.lr, secs);
      std::fflush(stdout);
    }
  };
  train(state, data, process, cfg.train, hooks);
  std::cout << "checkpoint " << last.string() << "\n";
  return Ok;
}

int cmd_sample(const Common& c, const std::string& checkpoint, const std::string& oracle, std::optional<std::size_t> count,
               std::optional<std::uint64_t> seed) {
  RunConfig cfg = c.load();
  const DiffusionProcess process = make_process(cfg);
  const std::size_t n = count.value_or(cfg.sample_count);
  const std::uint64_t s = seed.value_or(cfg.sample_seed);

  std::vector<GridFunction> samples;
  std::vector<GridFunction> real;
  if (!oracle.empty()) {
    if (oracle != "gaussian") throw Error(ErrorKind::Config, "--oracle-score supports only 'gaussian'");
    const auto data = load_training_data(cfg);
    const GaussianPrior prior = fit_gaussian_prior(data);
    SamplerConfig sc = cfg.sampler;
    sc.denoise_final = false;
    samples = sample_chains(make_gaussian_score(process, prior), process, data.front().axes(), 1, sc, n, s);
    real.assign(data.begin(), data.begin() + std::min<std::size_t>(32, data.size()));
  } else {
    const TrainState st = load_checkpoint(checkpoint_path(cfg, checkpoint), network_architecture(cfg));
    const Denoiser den = make_denoiser(st.net);
    const GridFunction grid = grid_template(cfg);
    samples = sample_chains(make_parametric_score(process, den), process, grid.axes(), grid.channels(), cfg.sampler,
                            n, s, &den);
    if (grid.axes().size() == 1) {
      auto data = load_training_data(cfg);
      real.assign(data.begin(), data.begin() + std::min<std::size_t>(32, data.size()));
    }
  }

  const fs::path dir = fs::path(cfg.output_dir) / "samples";
  fs::create_directories(dir);
  save_grids(dir / "samples.fdpg", samples);
  if (samples.front().axes().size() == 1) {
    std::ofstream csv(dir / "qhat.csv");
    csv << "index,q_hat,residual_mse\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto f = fit_quadratic(samples[i]);
      csv << i << ',' << f.q_hat << ',' << f.residual_mse << "\n";
    }
    std::vector<GridFunction> shown(samples.begin(), samples.begin() + std::min<std::size_t>(32, samples.size()));
    write_curves_svg(dir / "samples.svg", {{real, "#d62728"}, {shown, "#1f77b4"}},
                     "real (red) and generated (blue) samples");
    const auto sum = summarize_quadratic(samples);
    std::printf("%zu samples: in_band %.3f accepted %.3f positive %.3f negative %.3f mean residual mse %.4g\n",
                sum.count, sum.in_band, sum.accepted, sum.positive_fraction, sum.negative_fraction,
                sum.mean_residual_mse);
  }
  std::cout << "wrote " << (dir / "samples.fdpg").string() << "\n";
  return Ok;
}

std::vector<GridFunction> load_samples(const fs::path& p) {
  if (fs::is_directory(p)) {
    if (fs::exists(p / "meta.json")) return load_dataset(p);
    if (fs::exists(p / "samples.fdpg")) return load_grids(p / "samples.fdpg");
    if (fs::exists(p / "samples" / "samples.fdpg")) return load_grids(p / "samples" / "samples.fdpg");
    throw Error(ErrorKind::Io, "no samples found in " + p.string());
  }
  if (p.extension() == ".csv") return load_csv(p);
  return load_grids(p);
}

int cmd_eval(const std::string& input, const Common& c, const std::string& reference, const std::string& report_path) {
  const auto samples = load_samples(input);
  if (samples.empty()) throw Error(ErrorKind::EmptyBatch, "no samples in " + input);
  json rep;
  rep["count"] = samples.size();
  if (samples.front().axes().size() == 1) {
    const auto s = summarize_quadratic(samples);
    rep["quadratic"] = {{"in_band", s.in_band},
                        {"accepted", s.accepted},
                        {"positive_fraction", s.positive_fraction},
                        {"negative_fraction", s.negative_fraction},
                        {"mean_residual_mse", s.mean_residual_mse}};
  }
  const auto st = frequency_statistics(samples);
  rep["sample_variance"] = st.variance;
  std::vector<GridFunction> ref;
  if (!reference.empty()) ref = load_samples(reference);
  else if (!c.config.empty()) ref = load_training_data(c.load());
  if (!ref.empty()) {
    const auto rs = frequency_statistics(ref);
    if (rs.variance.size() != st.variance.size()) throw Error(ErrorKind::InvalidArgument, "reference grid differs");
    double peak = *std::max_element(rs.variance.begin(), rs.variance.end());
    std::vector<double> rel(st.variance.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < rel.size(); ++k) {
      rel[k] = rs.variance[k] > 0 ? st.variance[k] / rs.variance[k] - 1.0 : 0.0;
      // Frequencies carrying a negligible share of the energy are reported but not ranked.
      if (rs.variance[k] > 1e-6 * peak) worst = std::max(worst, std::abs(rel[k]));
    }
    rep["data_variance"] = rs.variance;
    rep["variance_relative_error"] = rel;
    rep["max_variance_relative_error"] = worst;
  }
  const std::string text = rep.dump(2);
  if (report_path.empty()) std::cout << text << "\n";
  else write_text(report_path, text + "\n");
  return Ok;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoul(tok));
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
  return out;
}

int cmd_reconstruct(const std::string& input, std::size_t dense, const std::string& grids, const std::string& cutoffs,
                    const std::string& out) {
  GridFunction ref = [&] {
    if (!input.empty()) return load_grid(input);
    // Default reference: a noise-free toy parabola on the dense grid.
    QuadraticDatasetSpec spec;
    spec.points = dense;
    spec.sigma = 0.0;
    Rng rng(0, 0);
    return quadratic_sample(spec, 1.0, rng);
  }();
  std::ofstream csv(out);
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + out);
  csv.precision(12);
  csv << "grid,nu,eps1,eps2,eps3,total,bound_holds\n";
  for (std::size_t n : parse_sizes(grids))
    for (double nu : parse_doubles(cutoffs)) {
      const Shape g(ref.axes().size(), n);
      const auto e = error_decomposition(ref, g, nu);
      csv << n << ',' << nu << ',' << e.eps1 << ',' << e.eps2 << ',' << e.eps3 << ',' << e.total << ','
          << (e.bound_holds ? 1 : 0) << "\n";
    }
  std::cout << "wrote " << out << "\n";
  return Ok;
}

int cmd_superres(const Common& c, const std::string& checkpoint, const std::string& input, std::size_t factor,
                 std::optional<double> t) {
  const RunConfig cfg = c.load();
  const TrainState st = load_checkpoint(checkpoint_path(cfg, checkpoint), network_architecture(cfg));
  const auto inputs = load_samples(input.empty() ? fs::path(cfg.output_dir) / "samples" : fs::path(input));
  if (inputs.empty()) throw Error(ErrorKind::EmptyBatch, "no inputs");
  std::vector<GridFunction> outs;
  for (const auto& x : inputs) {
    Shape target = x.shape();
    for (auto& n : target) n *= factor;
    outs.push_back(super_resolve(st.net, x, target, t.value_or(cfg.sampler.t_min)));
  }
  const fs::path dir = fs::path(cfg.output_dir) / "superres";
  fs::create_directories(dir);
  save_grids(dir / ("x" + std::to_string(factor) + ".fdpg"), outs);
  if (outs.front().axes().size() == 1) {
    std::vector<GridFunction> a(inputs.begin(), inputs.begin() + std::min<std::size_t>(8, inputs.size()));
    std::vector<GridFunction> b(outs.begin(), outs.begin() + std::min<std::size_t>(8, outs.size()));
    write_curves_svg(dir / ("x" + std::to_string(factor) + ".svg"), {{a, "#d62728"}, {b, "#1f77b4"}},
                     "input grid (red) and " + std::to_string(factor) + "x evaluation (blue)");
  }
  std::cout << "wrote " << outs.size() << " functions to " << dir.string() << "\n";
  return Ok;
}

}  // namespace
}  // namespace fdp::cli

int main(int argc, char** argv) {
  using namespace fdp::cli;
  CLI::App app{"Functional diffusion on grids: training, sampling and reconstruction"};
  app.set_version_flag("--version", FDP_VERSION);
  app.require_subcommand(1);

  Common common;
  bool resume = false;
  std::string checkpoint, oracle, input, reference, report, grids = "8,16,32,64", cutoffs = "2,4,8", out_csv;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_eval;
  std::size_t dense = 1024, factor = 2;

  auto* train = app.add_subcommand("train", "train the INR denoiser");
  add_common(train, common, true);
  train->add_flag("--resume", resume, "continue from the run directory's last checkpoint");

  auto* sample = app.add_subcommand("sample", "generate samples from a checkpoint or an oracle score");
  add_common(sample, common, true);
  sample->add_option("--checkpoint", checkpoint, "checkpoint (default: run directory's last)");
  sample->add_option("--oracle-score", oracle, "bypass the network: 'gaussian' fits the data's spectrum");
  sample->add_option("--count", count, "number of samples");
  sample->add_option("--seed", seed, "sampling seed");

  auto* eval = app.add_subcommand("eval", "metrics report for a samples file or directory");
  eval->add_option("input", input, "samples file, samples directory, dataset directory or run directory")->required();
  eval->add_option("--config", common.config, "config whose dataset is the reference");
  eval->add_option("--reference", reference, "reference samples (overrides --config)");
  eval->add_option("--report", report, "write the JSON report here instead of stdout");

  auto* recon = app.add_subcommand("reconstruct", "sampling error decomposition sweep (CSV)");
  recon->add_option("--input", input, "dense reference grid (.fdpg); default is a toy parabola");
  recon->add_option("--dense", dense, "points of the default reference");
  recon->add_option("--grids", grids, "comma-separated sampling grid sizes");
  recon->add_option("--cutoffs", cutoffs, "comma-separated band limits");
  recon->add_option("--csv", out_csv, "output CSV")->required();

  auto* superres = app.add_subcommand("superres", "evaluate denoised samples on a finer grid");
  add_common(superres, common, true);
  superres->add_option("--checkpoint", checkpoint, "checkpoint (default: run directory's last)");
  superres->add_option("--input", input, "grids to upscale (default: run directory's samples)");
  superres->add_option("--factor", factor, "grid refinement factor")->check(CLI::PositiveNumber);
  superres->add_option("--t", t_eval, "time passed to the network (default sampler.t_min)");

  auto* validate = app.add_subcommand("validate-spectrum", "check the configured spectrum and schedule");
  add_common(validate, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Ok : ConfigError;
  }

  try {
    if (*train) return cmd_train(common, resume);
    if (*sample) return cmd_sample(common, checkpoint, oracle, count, seed);
    if (*eval) return cmd_eval(input, common, reference, report);
    if (*recon) return cmd_reconstruct(input, dense, grids, cutoffs, out_csv);
    if (*superres) return cmd_superres(common, checkpoint, input, factor, t_eval);
    if (*validate) return cmd_validate(common);
  } catch (const fdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Failure;
  }
  return Ok;
}
