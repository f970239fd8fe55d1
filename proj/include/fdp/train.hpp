#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdp/inr.hpp"
#include "fdp/objective.hpp"
#include "fdp/optim.hpp"

namespace fdp {

struct StepMetrics {
  std::uint64_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
  bool clipped = false;
  bool skipped = false;
};

/**
 * @brief One outer update: batch_loss gradient through the inner loop, clipping, optimizer step.
 *
 * `step` is the 0-based update index used to derive the batch's random
 * streams. Throws NonFiniteGradient (parameters untouched) when the loss or
 * gradient is not finite.
 */
StepMetrics outer_step(InrNetwork& net, Optimizer& opt, const std::vector<GridFunction>& batch,
                       const DiffusionProcess& process, const ObjectiveConfig& objective, std::uint64_t seed,
                       std::uint64_t step);

/// Everything needed to resume training bit-exactly.
struct TrainState {
  InrNetwork net;
  Optimizer optimizer;
  /// Stream used for minibatch selection.
  Rng rng;
  std::uint64_t step = 0;
};

/**
 * Checkpoint layout (little-endian):
 *   "FDPC" | u32 version | architecture descriptor | u32 tensor count | (u32 rows, u32 cols, f64[])...
 *   | optimizer state | RNG state string | u64 step
 */
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);
/// Throws CheckpointMismatch when the stored architecture differs from `expected`.
TrainState load_checkpoint(const std::filesystem::path& path, const InrArchitecture& expected);

void write_architecture(std::ostream& os, const InrArchitecture& arch);
InrArchitecture read_architecture(std::istream& is);

enum class NonFinitePolicy { Abort, Skip };

struct TrainConfig {
  std::uint64_t steps = 2000;
  std::size_t batch_size = 8;
  std::uint64_t seed = 7;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
  NonFinitePolicy on_nonfinite = NonFinitePolicy::Abort;
  std::uint64_t log_every = 10;
  /// Checkpoint period in steps (0: only at the end).
  std::uint64_t checkpoint_every = 0;
};

/// Fresh state: network initialized from (seed, 0), batch stream (seed, 1).
TrainState initial_state(const InrArchitecture& arch, const TrainConfig& cfg);

struct TrainHooks {
  /// Receives one JSON object per logged step.
  std::ostream* log = nullptr;
  /// Directory receiving checkpoint-<step>.fdpc and checkpoint-last.fdpc.
  std::filesystem::path checkpoint_dir;
  std::function<void(const StepMetrics&)> on_step;
};

/// Runs outer steps until state.step == cfg.steps. Returns the metrics of every step taken.
std::vector<StepMetrics> train(TrainState& state, const std::vector<GridFunction>& data,
                               const DiffusionProcess& process, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace fdp
