#include "fdp/optim.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "binary_io.hpp"
#include "fdp/error.hpp"

namespace fdp {

using ad::Matrix;

double LrSchedule::at(std::uint64_t step) const {
  if (warmup > 0 && step <= warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total <= warmup || step >= total) return total > warmup ? min_lr : base_lr;
  const double u = static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * u));
}

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adabelief"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adabelief") return OptimizerKind::AdaBelief;
  throw Error(ErrorKind::Config, "unknown optimizer '" + name + "' (expected sgd | adabelief)");
}

double global_norm(const std::vector<Matrix>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {}

Optimizer::Update Optimizer::apply(std::vector<Matrix>& params, std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) throw Error(ErrorKind::InvalidArgument, "optimizer: gradient list mismatch");
  Update u;
  u.grad_norm = global_norm(grads);
  if (!std::isfinite(u.grad_norm)) throw Error(ErrorKind::NonFiniteGradient, "non-finite gradient norm");
  if (config_.clip_norm > 0.0 && u.grad_norm > config_.clip_norm) {
    const double f = config_.clip_norm / u.grad_norm;
    for (auto& g : grads) g *= f;
    u.clipped = true;
  }
  ++steps_;
  u.lr = config_.schedule.at(steps_);
  if (config_.kind == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= u.lr * grads[i];
    return u;
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.rows(), p.cols()));
      s_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols())
      throw Error(ErrorKind::InvalidArgument, "optimizer: gradient shape mismatch");
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    s_[i] = (b2 * s_[i].array() + (1.0 - b2) * (grads[i] - m_[i]).array().square() + config_.eps).matrix();
    params[i].array() -= u.lr * (m_[i].array() / c1) / ((s_[i].array() / c2).sqrt() + config_.eps);
  }
  return u;
}

void Optimizer::write(std::ostream& os) const {
  using namespace binary;
  put<std::uint32_t>(os, static_cast<std::uint32_t>(config_.kind));
  put(os, config_.schedule.base_lr);
  put<std::uint64_t>(os, config_.schedule.warmup);
  put<std::uint64_t>(os, config_.schedule.total);
  put(os, config_.schedule.min_lr);
  put(os, config_.beta1);
  put(os, config_.beta2);
  put(os, config_.eps);
  put(os, config_.clip_norm);
  put<std::uint64_t>(os, steps_);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m_.size()));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    put_matrix(os, m_[i]);
    put_matrix(os, s_[i]);
  }
}

Optimizer Optimizer::read(std::istream& is) {
  using namespace binary;
  OptimizerConfig c;
  const auto kind = get<std::uint32_t>(is);
  if (kind > 1) throw Error(ErrorKind::CheckpointMismatch, "unknown optimizer id in checkpoint");
  c.kind = static_cast<OptimizerKind>(kind);
  c.schedule.base_lr = get<double>(is);
  c.schedule.warmup = get<std::uint64_t>(is);
  c.schedule.total = get<std::uint64_t>(is);
  c.schedule.min_lr = get<double>(is);
  c.beta1 = get<double>(is);
  c.beta2 = get<double>(is);
  c.eps = get<double>(is);
  c.clip_norm = get<double>(is);
  Optimizer opt(c);
  opt.steps_ = get<std::uint64_t>(is);
  const auto n = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n; ++i) {
    opt.m_.push_back(get_matrix(is));
    opt.s_.push_back(get_matrix(is));
  }
  return opt;
}

}  // namespace fdp
