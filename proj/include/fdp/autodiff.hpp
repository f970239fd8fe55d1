#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fdp::ad {

using Matrix = Eigen::MatrixXd;

struct Node;

/**
 * @brief Handle to a value recorded on the tape.
 *
 * Every op appends a node holding its primal value, its parents and an adjoint
 * closure. Adjoint closures are themselves written with tape ops, so a
 * gradient computed with `create_graph = true` is again differentiable; this
 * is what lets outer gradients flow through the inner SGD loop.
 */
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool requires_grad() const;
  bool valid() const noexcept { return static_cast<bool>(node_); }
  Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<Node>& shared() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Adjoint closure: maps the upstream gradient to one gradient per parent.
/// Entries whose `need` flag is false may be left invalid.
using Backward = std::function<std::vector<Var>(const Var& upstream, const std::vector<char>& need)>;

struct Node {
  Matrix value;
  std::vector<Var> parents;
  Backward backward;
  bool requires_grad = false;
  std::uint64_t seq = 0;
};

/// Leaf that gradients are taken with respect to.
Var parameter(Matrix value);
/// Leaf without gradient.
Var constant(Matrix value);

/// Disables recording for its lifetime; ops then return constants.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool grad_enabled();

// Ops.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var neg(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var exp(const Var& a);
Var square(const Var& a);
/// a (n x m) + row (1 x m) broadcast over rows.
Var add_row(const Var& a, const Var& row);
/// Column sums, n x m -> 1 x m.
Var sum_rows(const Var& a);
/// 1 x m -> n x m.
Var broadcast_rows(const Var& row, Eigen::Index n);
/// Sum of all entries, -> 1 x 1.
Var sum(const Var& a);
/// 1 x 1 -> rows x cols filled with the scalar.
Var fill(const Var& s, Eigen::Index rows, Eigen::Index cols);

/**
 * @brief Real symmetric Fourier multiplier applied to every column.
 *
 * Each column is a row-major grid of the given shape; the result is
 * I(w * F(column)). `weights` must satisfy w[k] = w[-k], which makes the map
 * real and self-adjoint, so it is its own adjoint op.
 */
Var spectral_filter(const Var& a, std::shared_ptr<const std::vector<double>> weights,
                    std::shared_ptr<const std::vector<std::size_t>> shape);

/**
 * @brief Reverse pass from a scalar output.
 *
 * Returns d output / d wrt[i] for each requested var (zeros if unreachable).
 * With create_graph the returned vars carry their own graph.
 */
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false);
std::vector<Matrix> grad_values(const Var& output, std::span<const Var> wrt);

}  // namespace fdp::ad
