#include "fdp/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

#include "fdp/error.hpp"
#include "fdp/fft.hpp"
#include "fast_trig.hpp"

namespace fdp::ad {

namespace {

std::atomic<std::uint64_t> g_seq{0};
thread_local bool g_grad_enabled = true;

Var make_leaf(Matrix value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
  return Var(std::move(n));
}

Var make_node(Matrix value, std::vector<Var> parents, Backward backward) {
  bool needs = false;
  if (g_grad_enabled)
    for (const auto& p : parents) needs = needs || p.requires_grad();
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
  if (needs) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::InvalidArgument, std::string(op) + ": shape mismatch");
}

}  // namespace

const Matrix& Var::value() const { return node_->value; }
bool Var::requires_grad() const { return node_ && node_->requires_grad; }

Var parameter(Matrix value) { return make_leaf(std::move(value), true); }
Var constant(Matrix value) { return make_leaf(std::move(value), false); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Var matmul(const Var& a, const Var& b, bool ta, bool tb) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  const auto inner_a = ta ? A.rows() : A.cols();
  const auto inner_b = tb ? B.cols() : B.rows();
  if (inner_a != inner_b) throw Error(ErrorKind::InvalidArgument, "matmul: inner dimension mismatch");
  Matrix C;
  if (!ta && !tb) C.noalias() = A * B;
  else if (!ta && tb) C.noalias() = A * B.transpose();
  else if (ta && !tb) C.noalias() = A.transpose() * B;
  else C.noalias() = A.transpose() * B.transpose();
  return make_node(std::move(C), {a, b}, [a, b, ta, tb](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
    std::vector<Var> out(2);
    if (!ta && !tb) {
      if (need[0]) out[0] = matmul(g, b, false, true);
      if (need[1]) out[1] = matmul(a, g, true, false);
    } else if (!ta && tb) {
      if (need[0]) out[0] = matmul(g, b, false, false);
      if (need[1]) out[1] = matmul(g, a, true, false);
    } else if (ta && !tb) {
      if (need[0]) out[0] = matmul(b, g, false, true);
      if (need[1]) out[1] = matmul(a, g, false, false);
    } else {
      if (need[0]) out[0] = matmul(b, g, true, true);
      if (need[1]) out[1] = matmul(g, a, true, true);
    }
    return out;
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make_node(a.value() + b.value(), {a, b}, [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {g, g}; });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make_node(a.value() - b.value(), {a, b}, [](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
    return {g, need[1] ? neg(g) : Var()};
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return make_node(a.value().cwiseProduct(b.value()), {a, b},
                   [a, b](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
                     return {need[0] ? mul(g, b) : Var(), need[1] ? mul(g, a) : Var()};
                   });
}

Var scale(const Var& a, double c) {
  return make_node(a.value() * c, {a}, [c](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {scale(g, c)}; });
}

Var neg(const Var& a) { return scale(a, -1.0); }

namespace {

struct TrigPair {
  Matrix s, c;
};

// Node for sin(a + phase * pi/2). Derivatives only shift the phase, so sin and
// cos of the argument are evaluated once and shared across all orders.
Var shifted_sin(const Var& a, std::shared_ptr<const TrigPair> pair, int phase) {
  phase &= 3;
  const Matrix& base = (phase % 2 == 0) ? pair->s : pair->c;
  Matrix value = phase >= 2 ? Matrix(-base) : base;
  return make_node(std::move(value), {a}, [a, pair, phase](const Var& g, const std::vector<char>&) -> std::vector<Var> {
    return {mul(g, shifted_sin(a, pair, phase + 1))};
  });
}

std::shared_ptr<const TrigPair> trig_pair(const Matrix& x) {
  auto pair = std::make_shared<TrigPair>();
  pair->s.resize(x.rows(), x.cols());
  pair->c.resize(x.rows(), x.cols());
  detail::sincos_kernel(x.data(), pair->s.data(), pair->c.data(), static_cast<std::size_t>(x.size()));
  return pair;
}

}  // namespace

Var sin(const Var& a) {
  if (!g_grad_enabled || !a.requires_grad()) {
    Matrix out(a.rows(), a.cols());
    detail::sincos_kernel(a.value().data(), out.data(), nullptr, static_cast<std::size_t>(a.value().size()));
    return constant(std::move(out));
  }
  return shifted_sin(a, trig_pair(a.value()), 0);
}

Var cos(const Var& a) {
  if (!g_grad_enabled || !a.requires_grad()) {
    Matrix out(a.rows(), a.cols());
    detail::sincos_kernel(a.value().data(), nullptr, out.data(), static_cast<std::size_t>(a.value().size()));
    return constant(std::move(out));
  }
  return shifted_sin(a, trig_pair(a.value()), 1);
}

Var exp(const Var& a) {
  return make_node(a.value().array().exp().matrix(), {a},
                   [a](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {mul(g, exp(a))}; });
}

Var square(const Var& a) {
  return make_node(a.value().array().square().matrix(), {a},
                   [a](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {scale(mul(g, a), 2.0)}; });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw Error(ErrorKind::InvalidArgument, "add_row: shape mismatch");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return make_node(std::move(out), {a, row}, [](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
    return {g, need[1] ? sum_rows(g) : Var()};
  });
}

Var sum_rows(const Var& a) {
  const auto n = a.rows();
  return make_node(a.value().colwise().sum(), {a},
                   [n](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {broadcast_rows(g, n)}; });
}

Var broadcast_rows(const Var& row, Eigen::Index n) {
  if (row.rows() != 1) throw Error(ErrorKind::InvalidArgument, "broadcast_rows: expects a row vector");
  return make_node(row.value().replicate(n, 1), {row},
                   [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {sum_rows(g)}; });
}

Var sum(const Var& a) {
  const auto r = a.rows();
  const auto c = a.cols();
  Matrix s(1, 1);
  s(0, 0) = a.value().sum();
  return make_node(std::move(s), {a}, [r, c](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {fill(g, r, c)}; });
}

Var fill(const Var& s, Eigen::Index rows, Eigen::Index cols) {
  if (s.rows() != 1 || s.cols() != 1) throw Error(ErrorKind::InvalidArgument, "fill: expects a scalar");
  return make_node(Matrix::Constant(rows, cols, s.scalar()), {s},
                   [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {sum(g)}; });
}

Var spectral_filter(const Var& a, std::shared_ptr<const std::vector<double>> weights,
                    std::shared_ptr<const std::vector<std::size_t>> shape) {
  const Matrix& A = a.value();
  const auto n = static_cast<std::size_t>(A.rows());
  if (weights->size() != n) throw Error(ErrorKind::InvalidArgument, "spectral_filter: weight count mismatch");
  Matrix out(A.rows(), A.cols());
  std::vector<cplx> buf(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = A(static_cast<Eigen::Index>(i), c);
    fft_nd(buf, *shape, false);
    for (std::size_t k = 0; k < n; ++k) buf[k] *= (*weights)[k];
    fft_nd(buf, *shape, true);
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), c) = buf[i].real() * inv_n;
  }
  return make_node(std::move(out), {a}, [weights, shape](const Var& g, const std::vector<char>&) -> std::vector<Var> {
    return {spectral_filter(g, weights, shape)};
  });
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph) {
  if (output.rows() != 1 || output.cols() != 1)
    throw Error(ErrorKind::InvalidArgument, "grad: output must be a scalar");
  std::vector<Var> result(wrt.size());
  if (!output.requires_grad()) {
    for (std::size_t i = 0; i < wrt.size(); ++i) result[i] = constant(Matrix::Zero(wrt[i].rows(), wrt[i].cols()));
    return result;
  }

  // Reachable nodes that require grad, visited in reverse creation order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{output.node()};
  seen.insert(output.node());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p.requires_grad() && seen.insert(p.node()).second) stack.push_back(p.node());
    }
  }
  std::sort(order.begin(), order.end(), [](Node* x, Node* y) { return x->seq > y->seq; });

  std::unordered_set<Node*> wanted;
  for (const auto& w : wrt) wanted.insert(w.node());
  // A node is relevant when some requested var is among its ancestors (or itself);
  // adjoints are only propagated into relevant parents.
  std::unordered_set<Node*> relevant;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    bool rel = wanted.count(n) > 0;
    for (const auto& p : n->parents) rel = rel || relevant.count(p.node()) > 0;
    if (rel) relevant.insert(n);
  }

  std::unordered_map<Node*, Var> grads;
  std::unique_ptr<NoGradGuard> guard;
  if (!create_graph) guard = std::make_unique<NoGradGuard>();
  grads[output.node()] = constant(Matrix::Ones(1, 1));

  std::vector<char> need;
  for (Node* n : order) {
    auto it = grads.find(n);
    if (it == grads.end() || !n->backward) continue;
    const Var g = it->second;
    if (!wanted.count(n)) grads.erase(it);
    if (!relevant.count(n)) continue;
    need.assign(n->parents.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < n->parents.size(); ++i) {
      need[i] = n->parents[i].requires_grad() && relevant.count(n->parents[i].node()) > 0;
      any = any || need[i];
    }
    if (!any) continue;
    auto parent_grads = n->backward(g, need);
    for (std::size_t i = 0; i < n->parents.size(); ++i) {
      const Var& p = n->parents[i];
      if (!need[i] || !parent_grads[i].valid()) continue;
      auto [slot, inserted] = grads.try_emplace(p.node(), parent_grads[i]);
      if (!inserted) slot->second = add(slot->second, parent_grads[i]);
    }
  }

  for (std::size_t i = 0; i < wrt.size(); ++i) {
    auto it = grads.find(wrt[i].node());
    result[i] = it != grads.end() ? it->second : constant(Matrix::Zero(wrt[i].rows(), wrt[i].cols()));
  }
  return result;
}

std::vector<Matrix> grad_values(const Var& output, std::span<const Var> wrt) {
  auto g = grad(output, wrt, false);
  std::vector<Matrix> out;
  out.reserve(g.size());
  for (auto& v : g) out.push_back(v.value());
  return out;
}

}  // namespace fdp::ad
