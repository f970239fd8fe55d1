#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fdp/autodiff.hpp"
#include "fdp/rng.hpp"
#include "fdp/score.hpp"
#include "fdp/spectral.hpp"

namespace fdp {

enum class Activation { Sine, Gabor };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

/**
 * @brief Shape and fixed hyperparameters of the INR denoiser.
 *
 * Inputs per query point: coordinates rescaled to [-1, 1], the noisy function
 * value(s) at that point, and a sinusoidal embedding of t / time_scale.
 * Hidden layer l computes act(omega_l (h W_l + b_l + psi_l)), adding its input
 * back when skip[l] is set. psi holds one shift vector per hidden layer.
 */
struct InrArchitecture {
  std::size_t coord_dims = 1;
  std::size_t channels = 1;
  std::size_t time_embedding = 16;
  std::size_t hidden_layers = 8;
  std::size_t width = 128;
  Activation activation = Activation::Sine;
  double omega_first = 30.0;
  double omega_hidden = 30.0;
  /// Gaussian envelope scale of the Gabor wavelet exp(-(g x)^2) sin(omega x).
  double gabor_scale = 10.0;
  std::vector<bool> skip;
  double time_scale = 1.0;
  std::size_t inner_steps = 3;
  double inner_lr = 1e-2;
  bool first_order = false;

  std::size_t input_dim() const { return coord_dims + channels + time_embedding; }
  std::size_t modulation_dim() const { return hidden_layers * width; }
  /// Skip on every `every`-th hidden layer (1-based), never on the first.
  static std::vector<bool> skip_every(std::size_t hidden_layers, std::size_t every);
  void validate() const;
  bool operator==(const InrArchitecture&) const = default;
};

/// One 1 x width shift row per hidden layer.
using Modulation = std::vector<ad::Matrix>;
Modulation zero_modulation(const InrArchitecture& arch);

class InrNetwork {
 public:
  InrNetwork(InrArchitecture arch, std::vector<ad::Matrix> params);
  /// Variance-preserving init for the activation family (SIREN uniform bounds).
  static InrNetwork initialize(const InrArchitecture& arch, Rng& rng);

  const InrArchitecture& architecture() const noexcept { return arch_; }
  /// Ordered [W_0, b_0, ..., W_L, b_L]; the last pair is the linear output layer.
  const std::vector<ad::Matrix>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;
  InrNetwork with_parameters(std::vector<ad::Matrix> params) const;

 private:
  InrArchitecture arch_;
  std::vector<ad::Matrix> params_;
};

/// Feature matrix (points x input_dim) for coordinates (points x coord_dims,
/// already in [-1, 1]) and conditioning values (points x channels).
ad::Matrix build_inputs(const InrArchitecture& arch, const ad::Matrix& coords, const ad::Matrix& conditioning,
                        double t);
/// Grid coordinates of f rescaled to [-1, 1] and its values as a points x channels matrix.
ad::Matrix grid_coords(const GridFunction& f);
ad::Matrix grid_values(const GridFunction& f);

// Graph-level evaluation used by training.
ad::Var forward(const InrArchitecture& arch, std::span<const ad::Var> params, std::span<const ad::Var> psi,
                const ad::Var& inputs);
/// Inner SGD on the mean of (n(psi)[p_i] - target_i)^2 from psi = 0. With second-order
/// meta-gradients the updates stay on the graph; otherwise each step restarts
/// from a detached leaf.
std::vector<ad::Var> inner_loop(const InrArchitecture& arch, std::span<const ad::Var> params,
                                const ad::Var& inputs, const ad::Var& target);
std::vector<ad::Var> parameter_vars(const InrNetwork& net);

// Value-level operations.
ad::Matrix eval(const InrNetwork& net, const Modulation& psi, double t, const ad::Matrix& coords,
                const ad::Matrix& conditioning);
Modulation modulate(const InrNetwork& net, const GridFunction& x_noisy, double t);
/// Per-step inner fit losses (mean squared error, length inner_steps + 1) for diagnostics.
std::vector<double> modulation_trace(const InrNetwork& net, const GridFunction& x_noisy, double t);
/// Modulate on the grid of x_noisy and evaluate there.
GridFunction denoise(const InrNetwork& net, const GridFunction& x_noisy, double t);
/// Modulate on the grid of x_noisy, evaluate on a finer grid with the given sizes.
GridFunction denoise_at(const InrNetwork& net, const GridFunction& x_noisy, double t, const Shape& sizes);
Denoiser make_denoiser(const InrNetwork& net);

}  // namespace fdp
