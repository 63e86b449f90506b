#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mixres/losses.hpp"
#include "mixres/network.hpp"

namespace mixres {

enum class EstimateKind { exact_sup, exhaustive, ascent_lower_bound };

struct ComplexityEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  Index n = 0;
  Index n_eps = 0;
  EstimateKind kind = EstimateKind::exact_sup;
};

/// Empirical Rademacher complexity of {x ↦ ω·x + b : ‖ω‖₂ = 1, |b| ≤ 1} at
/// the columns of `points`. Each draw uses the closed-form sup
/// ‖n⁻¹Σε_i x_i‖₂ + |n⁻¹Σε_i|. When n_eps ≥ 2ⁿ all sign patterns are
/// enumerated instead (kind = exhaustive, std_err = 0).
ComplexityEstimate rc_linear_exact(const Eigen::MatrixXd& points, Index n_eps, std::mt19937_64& rng);

/// Mean of the closed-form sup over all 2ⁿ sign patterns (n ≤ 24).
double rc_linear_exhaustive(const Eigen::MatrixXd& points);

/// (√(2d log 2d) + 1) / √n.
double rc_linear_bound(Index dim, Index n);

/// Certified lower bound on the empirical complexity of the box-constrained
/// two-layer class. For fixed (ω, b) the sup over (c, a) is attained at box
/// corners, leaving 2B|n⁻¹Σε| + 8B·max |n⁻¹Σε σ(ω·x+b)|; the inner max is
/// approached by projected ascent from `restarts` random starts.
ComplexityEstimate rc_network_lower_bound(const TwoLayerSpec& spec, const Eigen::MatrixXd& points, Index n_eps,
                                          Index restarts, std::mt19937_64& rng);

/// 2(√d + 1): Lipschitz constant of ReQU on the range of ω·x + b.
double requ_lipschitz(Index dim);
/// C₁ = 16 l₁ + 2 + 16 l₁ √(2d log 2d).
double network_complexity_constant(Index dim);
/// C₁ B / √n.
double rc_network_bound(Index dim, double barron, Index n);

/// Exact empirical complexity of a finite class given as rows of values
/// f(x_1..x_n): mean over all 2ⁿ sign patterns of max_f |n⁻¹Σε_i f(x_i)|.
double rc_finite_exhaustive(const Eigen::MatrixXd& values);

struct GapPoint {
  Index n = 0;
  double gap_mean = 0.0;
  double gap_stderr = 0.0;
};

struct GapCurve {
  double reference = 0.0;
  std::vector<GapPoint> points;
};

/// Reference (expected) loss: tensor Gauss–Legendre of order 64 for d ≤ 3,
/// 10⁶-point Monte Carlo otherwise.
double reference_loss(Method method, const Field& phi, const Field* psi, const Problem& problem,
                      const LossWeights& weights, std::uint64_t seed = 1);

/// Mean over `trials` fresh batches of |L_n - L_ref| for each n, with the
/// boundary batch n̄ = max(⌈n/d²⌉, 1). Trial t of size n uses seed
/// derive_seed(derive_seed(seed, n), t).
GapCurve quadrature_gap(Method method, const Field& phi, const Field* psi, const Problem& problem,
                        const LossWeights& weights, const std::vector<Index>& n_values, Index trials,
                        std::uint64_t seed);

/// Least-squares slope of log y against log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mixres
