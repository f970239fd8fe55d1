#include "fdp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "fdp/error.hpp"
#include "fdp/grid_io.hpp"

namespace fdp {

OperatorSpectrum SpectrumConfig::build() const {
  OperatorSpectrum s;
  if (preset == "toy1d") {
    s = OperatorSpectrum::toy1d(max_frequency);
  } else if (preset == "image2d") {
    s = OperatorSpectrum::image2d(max_frequency);
  } else if (preset == "table") {
    if (b.empty() || b.size() != r.size())
      throw Error(ErrorKind::Config, "spectrum tables b and r must be non-empty and of equal length");
    s = OperatorSpectrum::table1d(b, r);
  } else {
    throw Error(ErrorKind::Config, "unknown spectrum preset '" + preset + "' (expected toy1d, image2d or table)");
  }
  s.drift_bound = drift_bound;
  s.tail_start = tail_start;
  return s;
}

namespace {

std::string where(const std::string& source, const YAML::Mark& m) {
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

template <class T>
T scalar(const YAML::Node& n) {
  if (!n.IsScalar()) throw Error(ErrorKind::Config, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorKind::Config, "cannot read '" + n.Scalar() + "' as the expected type");
  }
}

std::vector<double> number_list(const YAML::Node& n) {
  if (!n.IsSequence()) throw Error(ErrorKind::Config, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : n) out.push_back(scalar<double>(e));
  return out;
}

struct Field {
  std::function<void(RunConfig&, const YAML::Node&)> set;
  std::function<void(const RunConfig&, YAML::Emitter&)> emit;
};

using Section = std::vector<std::pair<std::string, Field>>;

template <class T>
void emit_value(YAML::Emitter& e, const T& v) {
  e << v;
}

// Shortest representation that reads back to the same double.
void emit_value(YAML::Emitter& e, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  e << std::string(buf, r.ptr);
}

template <class T, class Get>
Field plain(Get get) {
  return {[get](RunConfig& c, const YAML::Node& n) { get(c) = scalar<T>(n); },
          [get](const RunConfig& c, YAML::Emitter& e) { emit_value(e, get(c)); }};
}

template <class Get, class Parse, class Name>
Field named(Get get, Parse parse, Name name) {
  return {[get, parse](RunConfig& c, const YAML::Node& n) { get(c) = parse(scalar<std::string>(n)); },
          [get, name](const RunConfig& c, YAML::Emitter& e) { e << std::string(name(get(c))); }};
}

template <class Get>
Field list(Get get) {
  return {[get](RunConfig& c, const YAML::Node& n) { get(c) = number_list(n); },
          [get](const RunConfig& c, YAML::Emitter& e) {
            e << YAML::Flow << YAML::BeginSeq;
            for (double v : get(c)) emit_value(e, v);
            e << YAML::EndSeq;
          }};
}

#define FDP_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, Section>>& schema() {
  using U64 = std::uint64_t;
  using Sz = std::size_t;
  static const std::vector<std::pair<std::string, Section>> s = {
      {"spectrum",
       {{"preset", plain<std::string>(FDP_REF(spectrum.preset))},
        {"max_frequency", plain<Sz>(FDP_REF(spectrum.max_frequency))},
        {"b", list(FDP_REF(spectrum.b))},
        {"r", list(FDP_REF(spectrum.r))},
        {"drift_bound", plain<double>(FDP_REF(spectrum.drift_bound))},
        {"tail_start", plain<Sz>(FDP_REF(spectrum.tail_start))}}},
      {"schedule",
       {{"kind", named(FDP_REF(schedule.kind), TimeSchedule::parse_kind, TimeSchedule::kind_name)},
        {"horizon", plain<double>(FDP_REF(schedule.horizon))},
        {"beta_min", plain<double>(FDP_REF(schedule.beta_min))},
        {"beta_max", plain<double>(FDP_REF(schedule.beta_max))}}},
      {"network",
       {{"hidden_layers", plain<Sz>(FDP_REF(network.hidden_layers))},
        {"width", plain<Sz>(FDP_REF(network.width))},
        {"coord_dims", plain<Sz>(FDP_REF(network.coord_dims))},
        {"channels", plain<Sz>(FDP_REF(network.channels))},
        {"time_embedding", plain<Sz>(FDP_REF(network.time_embedding))},
        {"time_scale", plain<double>(FDP_REF(network.time_scale))},
        {"activation", named(FDP_REF(network.activation), parse_activation, activation_name)},
        {"omega_first", plain<double>(FDP_REF(network.omega_first))},
        {"omega_hidden", plain<double>(FDP_REF(network.omega_hidden))},
        {"gabor_scale", plain<double>(FDP_REF(network.gabor_scale))},
        {"skip_every", plain<Sz>(FDP_REF(skip_every))},
        {"inner_steps", plain<Sz>(FDP_REF(network.inner_steps))},
        {"inner_lr", plain<double>(FDP_REF(network.inner_lr))},
        {"first_order", plain<bool>(FDP_REF(network.first_order))}}},
      {"train",
       {{"steps", plain<U64>(FDP_REF(train.steps))},
        {"batch_size", plain<Sz>(FDP_REF(train.batch_size))},
        {"seed", plain<U64>(FDP_REF(train.seed))},
        {"weighting", named(FDP_REF(train.objective.weighting), parse_weighting, weighting_name)},
        {"t_min", plain<double>(FDP_REF(train.objective.t_min))},
        {"t_max", plain<double>(FDP_REF(train.objective.t_max))},
        {"optimizer", named(FDP_REF(train.optimizer.kind), parse_optimizer, optimizer_name)},
        {"lr", plain<double>(FDP_REF(train.optimizer.schedule.base_lr))},
        {"warmup", plain<U64>(FDP_REF(train.optimizer.schedule.warmup))},
        {"decay_steps", plain<U64>(FDP_REF(train.optimizer.schedule.total))},
        {"min_lr", plain<double>(FDP_REF(train.optimizer.schedule.min_lr))},
        {"beta1", plain<double>(FDP_REF(train.optimizer.beta1))},
        {"beta2", plain<double>(FDP_REF(train.optimizer.beta2))},
        {"eps", plain<double>(FDP_REF(train.optimizer.eps))},
        {"clip_norm", plain<double>(FDP_REF(train.optimizer.clip_norm))},
        {"on_nonfinite",
         named(FDP_REF(train.on_nonfinite),
               [](const std::string& v) {
                 if (v == "abort") return NonFinitePolicy::Abort;
                 if (v == "skip-step") return NonFinitePolicy::Skip;
                 throw Error(ErrorKind::Config, "on_nonfinite must be abort or skip-step, got '" + v + "'");
               },
               [](NonFinitePolicy p) { return p == NonFinitePolicy::Abort ? "abort" : "skip-step"; })},
        {"log_every", plain<U64>(FDP_REF(train.log_every))},
        {"checkpoint_every", plain<U64>(FDP_REF(train.checkpoint_every))}}},
      {"sampler",
       {{"steps", plain<Sz>(FDP_REF(sampler.n_steps))},
        {"t_min", plain<double>(FDP_REF(sampler.t_min))},
        {"scheme", named(FDP_REF(sampler.scheme), parse_scheme, scheme_name)},
        {"integrator", named(FDP_REF(sampler.integrator), parse_integrator, integrator_name)},
        {"corrector_steps", plain<Sz>(FDP_REF(sampler.corrector_steps))},
        {"snr", plain<double>(FDP_REF(sampler.snr))},
        {"denoise_final", plain<bool>(FDP_REF(sampler.denoise_final))},
        {"count", plain<Sz>(FDP_REF(sample_count))},
        {"seed", plain<U64>(FDP_REF(sample_seed))}}},
      {"dataset",
       {{"kind", plain<std::string>(FDP_REF(dataset.kind))},
        {"path", plain<std::string>(FDP_REF(dataset.path))},
        {"points", plain<Sz>(FDP_REF(dataset.quadratic.points))},
        {"lo", plain<double>(FDP_REF(dataset.quadratic.lo))},
        {"hi", plain<double>(FDP_REF(dataset.quadratic.hi))},
        {"sigma", plain<double>(FDP_REF(dataset.quadratic.sigma))},
        {"count", plain<Sz>(FDP_REF(dataset.quadratic.count))},
        {"seed", plain<U64>(FDP_REF(dataset.quadratic.seed))},
        {"noise", named(FDP_REF(dataset.quadratic.noise), parse_noise_mode, noise_mode_name)}}},
      {"output", {{"dir", plain<std::string>(FDP_REF(output_dir))}}},
  };
  return s;
}

#undef FDP_REF

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Config, where(source, e.mark) + ": " + e.msg);
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw Error(ErrorKind::Config, where(source, root.Mark()) + ": top level must be a mapping");
  for (const auto& sec : root) {
    const auto name = sec.first.as<std::string>();
    const auto* fields = [&]() -> const Section* {
      for (const auto& [n, f] : schema())
        if (n == name) return &f;
      return nullptr;
    }();
    if (!fields) throw Error(ErrorKind::Config, where(source, sec.first.Mark()) + ": unknown section '" + name + "'");
    if (!sec.second.IsMap())
      throw Error(ErrorKind::Config, where(source, sec.second.Mark()) + ": section '" + name + "' must be a mapping");
    for (const auto& kv : sec.second) {
      const auto key = kv.first.as<std::string>();
      auto it = std::find_if(fields->begin(), fields->end(), [&](const auto& f) { return f.first == key; });
      if (it == fields->end())
        throw Error(ErrorKind::Config, where(source, kv.first.Mark()) + ": unknown key '" + name + "." + key + "'");
      try {
        it->second.set(cfg, kv.second);
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, where(source, kv.second.Mark()) + ": " + name + "." + key + ": " + e.detail());
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw Error(ErrorKind::Config, "override '" + a + "' is not of the form section.key=value");
    const std::string name = a.substr(0, dot), key = a.substr(dot + 1, eq - dot - 1);
    const auto sec = std::find_if(schema().begin(), schema().end(), [&](const auto& s) { return s.first == name; });
    if (sec == schema().end()) throw Error(ErrorKind::Config, "override: unknown section '" + name + "'");
    const auto it = std::find_if(sec->second.begin(), sec->second.end(), [&](const auto& f) { return f.first == key; });
    if (it == sec->second.end()) throw Error(ErrorKind::Config, "override: unknown key '" + name + "." + key + "'");
    try {
      it->second.set(cfg, YAML::Load(a.substr(eq + 1)));
    } catch (const YAML::Exception& e) {
      throw Error(ErrorKind::Config, "override '" + a + "': " + e.msg);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, "override '" + a + "': " + e.detail());
    }
  }
}

std::string to_yaml(const RunConfig& cfg) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  for (const auto& [name, fields] : schema()) {
    e << YAML::Key << name << YAML::Value << YAML::BeginMap;
    for (const auto& [key, f] : fields) {
      e << YAML::Key << key << YAML::Value;
      f.emit(cfg, e);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

InrArchitecture network_architecture(const RunConfig& cfg) {
  InrArchitecture a = cfg.network;
  a.skip = cfg.skip_every ? InrArchitecture::skip_every(a.hidden_layers, cfg.skip_every)
                          : std::vector<bool>(a.hidden_layers, false);
  return a;
}

DiffusionProcess make_process(const RunConfig& cfg) {
  cfg.schedule.validate();
  return DiffusionProcess(cfg.spectrum.build(), cfg.schedule);
}

std::vector<GridFunction> load_training_data(const RunConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.kind == "quadratic") return generate_quadratic(d.quadratic);
  if (d.kind == "directory") return load_dataset(d.path);
  if (d.kind == "csv") return load_csv(d.path, d.quadratic.lo, d.quadratic.hi);
  throw Error(ErrorKind::Config, "unknown dataset kind '" + d.kind + "' (expected quadratic, directory or csv)");
}

}  // namespace fdp
