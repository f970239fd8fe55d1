#include "fdp/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdp/error.hpp"
#include "fdp/grid_io.hpp"
#include "json.hpp"

namespace fdp {

const char* noise_mode_name(QuadraticNoise m) { return m == QuadraticNoise::PerPoint ? "per_point" : "per_sample"; }

QuadraticNoise parse_noise_mode(const std::string& name) {
  if (name == "per_point") return QuadraticNoise::PerPoint;
  if (name == "per_sample") return QuadraticNoise::PerSample;
  throw Error(ErrorKind::Config, "unknown noise mode '" + name + "' (expected per_point | per_sample)");
}

GridFunction quadratic_sample(const QuadraticDatasetSpec& spec, double q, Rng& rng) {
  const Axis axis{spec.points, spec.lo, spec.hi};
  std::vector<double> v(spec.points);
  const double offset = spec.noise == QuadraticNoise::PerSample ? spec.sigma * rng.normal() : 0.0;
  for (std::size_t i = 0; i < spec.points; ++i) {
    const double p = axis.point(i);
    const double eps = spec.noise == QuadraticNoise::PerPoint ? spec.sigma * rng.normal() : offset;
    v[i] = q * p * p + eps;
  }
  return GridFunction({axis}, 1, std::move(v));
}

std::vector<GridFunction> generate_quadratic(const QuadraticDatasetSpec& spec) {
  std::vector<GridFunction> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Rng rng(spec.seed, i);
    const double q = rng.bernoulli() ? 1.0 : -1.0;
    out.push_back(quadratic_sample(spec, q, rng));
  }
  return out;
}

GaussianMixturePrior quadratic_prior(const QuadraticDatasetSpec& spec) {
  const Axis axis{spec.points, spec.lo, spec.hi};
  const std::size_t n = spec.points;
  // White per-point noise has unitary variance sigma^2 at every frequency; a
  // per-sample offset lives on the DC coefficient only (unitary variance N sigma^2).
  std::vector<double> var(n, 0.0);
  if (spec.noise == QuadraticNoise::PerPoint)
    var.assign(n, spec.sigma * spec.sigma);
  else
    var[0] = static_cast<double>(n) * spec.sigma * spec.sigma;
  GaussianMixturePrior prior;
  for (double q : {1.0, -1.0}) {
    std::vector<double> curve(n);
    for (std::size_t i = 0; i < n; ++i) curve[i] = q * axis.point(i) * axis.point(i);
    prior.components.push_back(GaussianPrior{{axis}, to_spectrum(curve, {n}), var});
    prior.weights.push_back(0.5);
  }
  return prior;
}

QuadraticFit fit_quadratic(const GridFunction& sample) {
  if (sample.ndim() != 1 || sample.channels() != 1)
    throw Error(ErrorKind::InvalidArgument, "fit_quadratic expects a 1D single-channel function");
  const Axis& axis = sample.axes()[0];
  double xp = 0.0, pp = 0.0;
  for (std::size_t i = 0; i < axis.size; ++i) {
    const double p2 = axis.point(i) * axis.point(i);
    xp += sample.value(i) * p2;
    pp += p2 * p2;
  }
  QuadraticFit fit;
  fit.q_hat = pp > 0.0 ? xp / pp : 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < axis.size; ++i) {
    const double r = sample.value(i) - fit.q_hat * axis.point(i) * axis.point(i);
    sq += r * r;
  }
  fit.residual_mse = sq / static_cast<double>(axis.size);
  return fit;
}

QuadraticSummary summarize_quadratic(const std::vector<GridFunction>& samples, double band, double mse_cap) {
  QuadraticSummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  for (const auto& f : samples) {
    const auto fit = fit_quadratic(f);
    const bool pos = std::abs(fit.q_hat - 1.0) < band;
    const bool neg = std::abs(fit.q_hat + 1.0) < band;
    s.in_band += (pos || neg) ? 1.0 : 0.0;
    s.positive_fraction += fit.q_hat > 0.0 ? 1.0 : 0.0;
    s.negative_fraction += fit.q_hat < 0.0 ? 1.0 : 0.0;
    s.mean_residual_mse += fit.residual_mse;
    s.accepted += ((pos || neg) && fit.residual_mse <= mse_cap) ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(samples.size());
  s.in_band /= n;
  s.positive_fraction /= n;
  s.negative_fraction /= n;
  s.mean_residual_mse /= n;
  s.accepted /= n;
  return s;
}

FrequencyStatistics frequency_statistics(const std::vector<GridFunction>& samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptyBatch, "no samples");
  const Shape shape = samples.front().shape();
  const std::size_t n = samples.front().num_points();
  FrequencyStatistics st{std::vector<cplx>(n), std::vector<double>(n, 0.0)};
  std::vector<std::vector<cplx>> spectra;
  spectra.reserve(samples.size());
  for (const auto& f : samples) {
    if (f.shape() != shape) throw Error(ErrorKind::InvalidArgument, "samples live on different grids");
    spectra.push_back(to_spectrum(f.channel(0), shape));
    for (std::size_t k = 0; k < n; ++k) st.mean[k] += spectra.back()[k];
  }
  const double m = static_cast<double>(samples.size());
  for (auto& v : st.mean) v /= m;
  for (const auto& sp : spectra)
    for (std::size_t k = 0; k < n; ++k) st.variance[k] += std::norm(sp[k] - st.mean[k]);
  for (auto& v : st.variance) v /= m * static_cast<double>(n);
  return st;
}

GaussianPrior fit_gaussian_prior(const std::vector<GridFunction>& samples) {
  auto st = frequency_statistics(samples);
  return GaussianPrior{samples.front().axes(), std::move(st.mean), std::move(st.variance)};
}

std::string quadratic_meta(const QuadraticDatasetSpec& spec) {
  nlohmann::json j = {{"kind", "quadratic"}, {"points", spec.points}, {"lo", spec.lo},
                      {"hi", spec.hi},       {"sigma", spec.sigma},   {"count", spec.count},
                      {"seed", spec.seed},   {"noise", noise_mode_name(spec.noise)}};
  return j.dump();
}

void save_dataset(const std::filesystem::path& dir, const std::vector<GridFunction>& samples,
                  const std::string& meta_json, std::size_t shard_size) {
  if (shard_size == 0) throw Error(ErrorKind::InvalidArgument, "shard_size must be positive");
  std::filesystem::create_directories(dir);
  nlohmann::json meta = meta_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta_json);
  meta["format"] = "fdpg";
  meta["count"] = samples.size();
  nlohmann::json shards = nlohmann::json::array();
  for (std::size_t begin = 0, index = 0; begin < samples.size(); begin += shard_size, ++index) {
    char name[32];
    std::snprintf(name, sizeof name, "shard-%03zu.fdpg", index);
    const std::size_t end = std::min(samples.size(), begin + shard_size);
    save_grids(dir / name, std::vector<GridFunction>(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     samples.begin() + static_cast<std::ptrdiff_t>(end)));
    shards.push_back(name);
  }
  meta["shards"] = shards;
  std::ofstream os(dir / "meta.json");
  if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / "meta.json").string());
  os << meta.dump(2) << '\n';
}

std::vector<GridFunction> load_dataset(const std::filesystem::path& dir) {
  std::ifstream is(dir / "meta.json");
  if (!is) throw Error(ErrorKind::Io, "no meta.json in " + dir.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, "malformed meta.json: " + std::string(e.what()));
  }
  std::vector<GridFunction> out;
  for (const auto& name : meta.at("shards")) {
    auto part = load_grids(dir / name.get<std::string>());
    for (auto& f : part) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace fdp
