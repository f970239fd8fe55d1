#include "fdp/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "fdp/error.hpp"
#include "json.hpp"

namespace fdp {

using ad::Matrix;

namespace {

constexpr char kMagic[4] = {'F', 'D', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

StepMetrics outer_step(InrNetwork& net, Optimizer& opt, const std::vector<GridFunction>& batch,
                       const DiffusionProcess& process, const ObjectiveConfig& objective, std::uint64_t seed,
                       std::uint64_t step) {
  BatchLoss bl = batch_loss(batch, net, process, objective, seed, step, true);
  StepMetrics m;
  m.step = step + 1;
  m.loss = bl.loss;
  if (!std::isfinite(bl.loss))
    throw Error(ErrorKind::NonFiniteGradient, "non-finite loss at step " + std::to_string(m.step));
  std::vector<Matrix> params = net.parameters();
  const auto u = opt.apply(params, bl.gradient);
  net = net.with_parameters(std::move(params));
  m.grad_norm = u.grad_norm;
  m.lr = u.lr;
  m.clipped = u.clipped;
  return m;
}

void write_architecture(std::ostream& os, const InrArchitecture& a) {
  using namespace binary;
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.coord_dims));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.channels));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.time_embedding));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.hidden_layers));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.width));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.activation));
  put(os, a.omega_first);
  put(os, a.omega_hidden);
  put(os, a.gabor_scale);
  for (bool s : a.skip) put<std::uint8_t>(os, s ? 1 : 0);
  put(os, a.time_scale);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(a.inner_steps));
  put(os, a.inner_lr);
  put<std::uint8_t>(os, a.first_order ? 1 : 0);
}

InrArchitecture read_architecture(std::istream& is) {
  using namespace binary;
  InrArchitecture a;
  a.coord_dims = get<std::uint32_t>(is);
  a.channels = get<std::uint32_t>(is);
  a.time_embedding = get<std::uint32_t>(is);
  a.hidden_layers = get<std::uint32_t>(is);
  a.width = get<std::uint32_t>(is);
  const auto act = get<std::uint32_t>(is);
  if (act > 1) throw Error(ErrorKind::CheckpointMismatch, "unknown activation id in checkpoint");
  a.activation = static_cast<Activation>(act);
  a.omega_first = get<double>(is);
  a.omega_hidden = get<double>(is);
  a.gabor_scale = get<double>(is);
  if (a.hidden_layers > 4096) throw Error(ErrorKind::CheckpointMismatch, "implausible layer count in checkpoint");
  a.skip.resize(a.hidden_layers);
  for (std::size_t l = 0; l < a.hidden_layers; ++l) a.skip[l] = get<std::uint8_t>(is) != 0;
  a.time_scale = get<double>(is);
  a.inner_steps = get<std::uint32_t>(is);
  a.inner_lr = get<double>(is);
  a.first_order = get<std::uint8_t>(is) != 0;
  return a;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  using namespace binary;
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    write_architecture(os, state.net.architecture());
    const auto& params = state.net.parameters();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) put_matrix(os, p);
    state.optimizer.write(os);
    put_string(os, state.rng.state());
    put<std::uint64_t>(os, state.step);
    if (!os) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  using namespace binary;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw Error(ErrorKind::CheckpointMismatch, path.string() + " is not a checkpoint");
  if (get<std::uint32_t>(is) != kVersion) throw Error(ErrorKind::CheckpointMismatch, "unsupported checkpoint version");
  InrArchitecture arch = read_architecture(is);
  const auto count = get<std::uint32_t>(is);
  std::vector<Matrix> params;
  for (std::uint32_t i = 0; i < count; ++i) params.push_back(get_matrix(is));
  InrNetwork net = [&] {
    try {
      return InrNetwork(arch, std::move(params));
    } catch (const Error& e) {
      throw Error(ErrorKind::CheckpointMismatch, std::string("corrupt checkpoint: ") + e.what());
    }
  }();
  Optimizer opt = Optimizer::read(is);
  Rng rng;
  rng.restore(get_string(is));
  const auto step = get<std::uint64_t>(is);
  return TrainState{std::move(net), std::move(opt), std::move(rng), step};
}

TrainState load_checkpoint(const std::filesystem::path& path, const InrArchitecture& expected) {
  TrainState s = load_checkpoint(path);
  if (!(s.net.architecture() == expected))
    throw Error(ErrorKind::CheckpointMismatch, "checkpoint architecture does not match the configuration");
  return s;
}

TrainState initial_state(const InrArchitecture& arch, const TrainConfig& cfg) {
  Rng init(cfg.seed, 0);
  return TrainState{InrNetwork::initialize(arch, init), Optimizer(cfg.optimizer), Rng(cfg.seed, 1), 0};
}

std::vector<StepMetrics> train(TrainState& state, const std::vector<GridFunction>& data,
                               const DiffusionProcess& process, const TrainConfig& cfg, const TrainHooks& hooks) {
  if (data.empty()) throw Error(ErrorKind::EmptyBatch, "training set is empty");
  if (cfg.batch_size == 0) throw Error(ErrorKind::Config, "batch_size must be >= 1");
  if (!hooks.checkpoint_dir.empty()) std::filesystem::create_directories(hooks.checkpoint_dir);
  const auto start = std::chrono::steady_clock::now();
  const std::string weighting = weighting_name(cfg.objective.weighting);
  std::vector<StepMetrics> history;
  std::vector<GridFunction> batch;
  while (state.step < cfg.steps) {
    batch.clear();
    for (std::size_t i = 0; i < cfg.batch_size; ++i) batch.push_back(data[state.rng.next_u64() % data.size()]);
    StepMetrics m;
    try {
      m = outer_step(state.net, state.optimizer, batch, process, cfg.objective, cfg.seed, state.step);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteGradient || cfg.on_nonfinite == NonFinitePolicy::Abort) throw;
      m.step = state.step + 1;
      m.loss = std::nan("");
      m.skipped = true;
    }
    ++state.step;
    history.push_back(m);
    if (hooks.on_step) hooks.on_step(m);
    const bool last = state.step == cfg.steps;
    if (hooks.log && (m.skipped || last || (cfg.log_every > 0 && state.step % cfg.log_every == 0))) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      nlohmann::json j = {{"step", m.step},     {"wall_time", wall}, {"loss", m.skipped ? nlohmann::json() : nlohmann::json(m.loss)},
                          {"grad_norm", m.grad_norm}, {"lr", m.lr}, {"clipped", m.clipped},
                          {"skipped", m.skipped}, {"weighting", weighting}, {"seed", cfg.seed}};
      *hooks.log << j.dump() << '\n' << std::flush;
    }
    if (!hooks.checkpoint_dir.empty()) {
      if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0)
        save_checkpoint(hooks.checkpoint_dir / ("checkpoint-" + std::to_string(state.step) + ".fdpc"), state);
      if (last) save_checkpoint(hooks.checkpoint_dir / "checkpoint-last.fdpc", state);
    }
  }
  return history;
}

}  // namespace fdp
