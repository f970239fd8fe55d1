#include "fdp/inr.hpp"

#include <cmath>
#include <numbers>

#include "fdp/error.hpp"

namespace fdp {

using ad::Matrix;
using ad::Var;

const char* activation_name(Activation a) { return a == Activation::Sine ? "sine" : "gabor"; }

Activation parse_activation(const std::string& name) {
  if (name == "sine") return Activation::Sine;
  if (name == "gabor") return Activation::Gabor;
  throw Error(ErrorKind::Config, "unknown activation '" + name + "' (expected sine | gabor)");
}

std::vector<bool> InrArchitecture::skip_every(std::size_t hidden_layers, std::size_t every) {
  std::vector<bool> mask(hidden_layers, false);
  if (every == 0) return mask;
  for (std::size_t l = 1; l < hidden_layers; ++l) mask[l] = ((l + 1) % every) == 0;
  return mask;
}

void InrArchitecture::validate() const {
  if (coord_dims == 0 || channels == 0 || hidden_layers == 0 || width == 0)
    throw Error(ErrorKind::Config, "INR needs coord_dims, channels, hidden_layers, width >= 1");
  if (time_embedding % 2 != 0) throw Error(ErrorKind::Config, "time_embedding must be even");
  if (skip.size() != hidden_layers) throw Error(ErrorKind::Config, "skip mask length must equal hidden_layers");
  if (skip.front()) throw Error(ErrorKind::Config, "the first hidden layer cannot carry a skip connection");
  if (!(time_scale > 0.0)) throw Error(ErrorKind::Config, "time_scale must be positive");
  if (!(inner_lr >= 0.0)) throw Error(ErrorKind::Config, "inner_lr must be non-negative");
}

Modulation zero_modulation(const InrArchitecture& arch) {
  return Modulation(arch.hidden_layers, Matrix::Zero(1, static_cast<Eigen::Index>(arch.width)));
}

InrNetwork::InrNetwork(InrArchitecture arch, std::vector<Matrix> params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  arch_.validate();
  const std::size_t layers = arch_.hidden_layers + 1;
  if (params_.size() != 2 * layers) throw Error(ErrorKind::InvalidArgument, "parameter list does not match architecture");
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(l == 0 ? arch_.input_dim() : arch_.width);
    const auto out = static_cast<Eigen::Index>(l + 1 == layers ? arch_.channels : arch_.width);
    const Matrix& w = params_[2 * l];
    const Matrix& b = params_[2 * l + 1];
    if (w.rows() != in || w.cols() != out || b.rows() != 1 || b.cols() != out)
      throw Error(ErrorKind::InvalidArgument, "parameter shape mismatch at layer " + std::to_string(l));
  }
}

InrNetwork InrNetwork::initialize(const InrArchitecture& arch, Rng& rng) {
  arch.validate();
  std::vector<Matrix> params;
  const std::size_t layers = arch.hidden_layers + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? arch.input_dim() : arch.width;
    const std::size_t out = l + 1 == layers ? arch.channels : arch.width;
    const double fan_in = static_cast<double>(in);
    const double bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / arch.omega_hidden;
    const double bias_bound = 1.0 / std::sqrt(fan_in) / (l == 0 ? arch.omega_first : arch.omega_hidden);
    Matrix w(in, out);
    Matrix b(1, out);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(0, j) = rng.uniform(-bias_bound, bias_bound);
    params.push_back(std::move(w));
    params.push_back(std::move(b));
  }
  return InrNetwork(arch, std::move(params));
}

std::size_t InrNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

InrNetwork InrNetwork::with_parameters(std::vector<Matrix> params) const { return InrNetwork(arch_, std::move(params)); }

Matrix build_inputs(const InrArchitecture& arch, const Matrix& coords, const Matrix& conditioning, double t) {
  const auto points = coords.rows();
  if (coords.cols() != static_cast<Eigen::Index>(arch.coord_dims) ||
      conditioning.cols() != static_cast<Eigen::Index>(arch.channels) || conditioning.rows() != points)
    throw Error(ErrorKind::InvalidArgument, "INR input shape mismatch");
  Matrix in(points, static_cast<Eigen::Index>(arch.input_dim()));
  in.leftCols(coords.cols()) = coords;
  in.middleCols(coords.cols(), conditioning.cols()) = conditioning;
  const double u = t / arch.time_scale;
  const std::size_t half = arch.time_embedding / 2;
  const Eigen::Index base = coords.cols() + conditioning.cols();
  for (std::size_t j = 0; j < half; ++j) {
    const double freq = std::numbers::pi * std::ldexp(1.0, static_cast<int>(j) - 2);
    in.col(base + static_cast<Eigen::Index>(2 * j)).setConstant(std::sin(freq * u));
    in.col(base + static_cast<Eigen::Index>(2 * j + 1)).setConstant(std::cos(freq * u));
  }
  return in;
}

Matrix grid_coords(const GridFunction& f) {
  const auto n = static_cast<Eigen::Index>(f.num_points());
  Matrix c(n, static_cast<Eigen::Index>(f.ndim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = f.coordinates(static_cast<std::size_t>(i));
    for (std::size_t a = 0; a < p.size(); ++a) {
      const Axis& ax = f.axes()[a];
      c(i, static_cast<Eigen::Index>(a)) = 2.0 * (p[a] - ax.lo) / ax.length() - 1.0;
    }
  }
  return c;
}

Matrix grid_values(const GridFunction& f) {
  const auto n = static_cast<Eigen::Index>(f.num_points());
  const auto ch = static_cast<Eigen::Index>(f.channels());
  Matrix v(n, ch);
  const auto vals = f.values();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < ch; ++c) v(i, c) = vals[static_cast<std::size_t>(i * ch + c)];
  return v;
}

namespace {

Var activate(const InrArchitecture& arch, const Var& pre, double omega) {
  if (arch.activation == Activation::Sine) return ad::sin(ad::scale(pre, omega));
  const double g2 = arch.gabor_scale * arch.gabor_scale;
  return ad::mul(ad::exp(ad::scale(ad::square(pre), -g2)), ad::sin(ad::scale(pre, omega)));
}

GridFunction to_grid(const std::vector<Axis>& axes, const Matrix& m) {
  std::vector<double> vals(static_cast<std::size_t>(m.size()));
  const auto ch = m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < ch; ++c) vals[static_cast<std::size_t>(i * ch + c)] = m(i, c);
  return GridFunction(axes, static_cast<std::size_t>(ch), std::move(vals));
}

std::vector<Var> constant_params(const InrNetwork& net) {
  std::vector<Var> out;
  for (const auto& p : net.parameters()) out.push_back(ad::constant(p));
  return out;
}

void check_channels(const InrNetwork& net, const GridFunction& x) {
  const auto& arch = net.architecture();
  if (x.channels() != arch.channels || x.ndim() != arch.coord_dims)
    throw Error(ErrorKind::InvalidArgument, "grid function does not match the network's input spec");
}

}  // namespace

Var forward(const InrArchitecture& arch, std::span<const Var> params, std::span<const Var> psi, const Var& inputs) {
  Var h = inputs;
  for (std::size_t l = 0; l < arch.hidden_layers; ++l) {
    const Var& w = params[2 * l];
    const Var& b = params[2 * l + 1];
    const Var shift = psi.empty() ? b : ad::add(b, psi[l]);
    const Var pre = ad::add_row(ad::matmul(h, w), shift);
    const Var a = activate(arch, pre, l == 0 ? arch.omega_first : arch.omega_hidden);
    h = arch.skip[l] ? ad::add(a, h) : a;
  }
  const std::size_t last = 2 * arch.hidden_layers;
  return ad::add_row(ad::matmul(h, params[last]), params[last + 1]);
}

std::vector<Var> inner_loop(const InrArchitecture& arch, std::span<const Var> params, const Var& inputs,
                            const Var& target) {
  std::vector<Var> psi;
  for (const auto& z : zero_modulation(arch)) psi.push_back(ad::parameter(z));
  const double inv_count = 1.0 / static_cast<double>(target.value().size());
  for (std::size_t step = 0; step < arch.inner_steps; ++step) {
    const Var out = forward(arch, params, psi, inputs);
    const Var loss = ad::scale(ad::sum(ad::square(ad::sub(out, target))), inv_count);
    const bool second_order = !arch.first_order && ad::grad_enabled();
    const auto g = ad::grad(loss, psi, second_order);
    for (std::size_t l = 0; l < psi.size(); ++l) {
      if (second_order)
        psi[l] = ad::sub(psi[l], ad::scale(g[l], arch.inner_lr));
      else
        psi[l] = ad::parameter(psi[l].value() - arch.inner_lr * g[l].value());
    }
  }
  return psi;
}

std::vector<Var> parameter_vars(const InrNetwork& net) {
  std::vector<Var> out;
  for (const auto& p : net.parameters()) out.push_back(ad::parameter(p));
  return out;
}

Matrix eval(const InrNetwork& net, const Modulation& psi, double t, const Matrix& coords, const Matrix& conditioning) {
  const auto& arch = net.architecture();
  if (psi.size() != arch.hidden_layers) throw Error(ErrorKind::InvalidArgument, "modulation size mismatch");
  ad::NoGradGuard guard;
  const auto params = constant_params(net);
  std::vector<Var> shifts;
  for (const auto& p : psi) shifts.push_back(ad::constant(p));
  return forward(arch, params, shifts, ad::constant(build_inputs(arch, coords, conditioning, t))).value();
}

Modulation modulate(const InrNetwork& net, const GridFunction& x_noisy, double t) {
  check_channels(net, x_noisy);
  const auto& arch = net.architecture();
  const auto params = constant_params(net);
  const Var inputs = ad::constant(build_inputs(arch, grid_coords(x_noisy), grid_values(x_noisy), t));
  const Var target = ad::constant(grid_values(x_noisy));
  // Value-level fit: no outer gradient is needed, so detach every step.
  InrArchitecture detached = arch;
  detached.first_order = true;
  Modulation out;
  for (const auto& v : inner_loop(detached, params, inputs, target)) out.push_back(v.value());
  return out;
}

std::vector<double> modulation_trace(const InrNetwork& net, const GridFunction& x_noisy, double t) {
  check_channels(net, x_noisy);
  const auto& arch = net.architecture();
  const Matrix coords = grid_coords(x_noisy);
  const Matrix target = grid_values(x_noisy);
  InrArchitecture stepped = arch;
  std::vector<double> trace;
  for (std::size_t s = 0; s <= arch.inner_steps; ++s) {
    stepped.inner_steps = s;
    const InrNetwork probe(stepped, net.parameters());
    const Modulation psi = modulate(probe, x_noisy, t);
    trace.push_back((eval(net, psi, t, coords, target) - target).squaredNorm() / static_cast<double>(target.size()));
  }
  return trace;
}

GridFunction denoise(const InrNetwork& net, const GridFunction& x_noisy, double t) {
  const Modulation psi = modulate(net, x_noisy, t);
  return to_grid(x_noisy.axes(), eval(net, psi, t, grid_coords(x_noisy), grid_values(x_noisy)));
}

GridFunction denoise_at(const InrNetwork& net, const GridFunction& x_noisy, double t, const Shape& sizes) {
  const Modulation psi = modulate(net, x_noisy, t);
  const GridFunction fine = resample(x_noisy, sizes);
  return to_grid(fine.axes(), eval(net, psi, t, grid_coords(fine), grid_values(fine)));
}

Denoiser make_denoiser(const InrNetwork& net) {
  return [net](const GridFunction& x, double t) { return denoise(net, x, t); };
}

}  // namespace fdp
