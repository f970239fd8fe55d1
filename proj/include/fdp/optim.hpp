#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdp/autodiff.hpp"

namespace fdp {

/// Linear warm-up to base_lr over `warmup` steps, then cosine decay to min_lr at `total` (0: no decay).
struct LrSchedule {
  double base_lr = 1e-4;
  std::uint64_t warmup = 0;
  std::uint64_t total = 0;
  double min_lr = 0.0;

  /// Learning rate of the 1-based update index `step`.
  double at(std::uint64_t step) const;
};

enum class OptimizerKind { Sgd, AdaBelief };

const char* optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::AdaBelief;
  LrSchedule schedule;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-16;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 1.0;
};

/**
 * @brief SGD or AdaBelief over a list of parameter matrices.
 *
 * AdaBelief tracks m = EMA(g) and s = EMA((g - m)^2) + eps and steps by
 * lr * m_hat / (sqrt(s_hat) + eps) with the usual bias corrections.
 */
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {});

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return steps_; }
  const std::vector<ad::Matrix>& first_moment() const noexcept { return m_; }
  const std::vector<ad::Matrix>& second_moment() const noexcept { return s_; }

  struct Update {
    double lr = 0.0;
    double grad_norm = 0.0;
    bool clipped = false;
  };
  /// Clips `grads` in place and applies one update to `params`.
  Update apply(std::vector<ad::Matrix>& params, std::vector<ad::Matrix>& grads);

  void write(std::ostream& os) const;
  static Optimizer read(std::istream& is);

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<ad::Matrix> m_;
  std::vector<ad::Matrix> s_;
};

double global_norm(const std::vector<ad::Matrix>& grads);

}  // namespace fdp
