#pragma once

#include <span>
#include <vector>

#include "fdp/inr.hpp"
#include "fdp/spectral.hpp"

namespace fdp {

/// Largest cutoff representable on every axis of f (floor(N/2) for the smallest axis).
double nyquist(const GridFunction& f);

/// Hard spectral cutoff keeping |k_a| <= nu on every axis; throws CutoffAboveNyquist.
GridFunction bandlimit(const GridFunction& f, double nu);

/// Trigonometric interpolant of bandlimit(samples, nu) at arbitrary points (one coordinate vector per point).
std::vector<double> reconstruct_from_samples(const GridFunction& samples, double nu,
                                             std::span<const std::vector<double>> points, std::size_t channel = 0);

/// L2 norm over the domain by grid quadrature: sqrt(cell volume * sum of squares).
double l2_norm(const GridFunction& f);

/**
 * @brief Terms of the three-part bound on the sampling reconstruction error.
 *
 * With I_Z the trigonometric interpolant from the grid Z, x the dense
 * reference and x_nu its band-limited version:
 *   eps1 = ||I_Z(x - x_nu)||, eps2 = ||I_Z(x_nu) - x_nu||, eps3 = ||x_nu - x||,
 *   total = ||I_Z(x) - x|| <= eps1 + eps2 + eps3.
 */
struct ErrorDecomposition {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  double total = 0.0;
  bool bound_holds = false;
};

/// `reference` must have at least 8x the points of `grid` per axis and a multiple of it; else ReferenceTooCoarse.
ErrorDecomposition error_decomposition(const GridFunction& reference, const Shape& grid, double nu);

/// Modulate on the sample's grid at t, evaluate the INR on a grid of the given sizes (>= the sample's).
GridFunction super_resolve(const InrNetwork& net, const GridFunction& sample, const Shape& target, double t);

}  // namespace fdp
