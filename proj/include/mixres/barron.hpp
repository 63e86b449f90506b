#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mixres/network.hpp"
#include "mixres/problem.hpp"

namespace mixres {

/// One term γ·cos(π(k·x + b)) with k ≠ 0 and b ∈ {0, ½, 1, 3/2}.
struct FourierTerm {
  double gamma = 0.0;
  Eigen::VectorXi k;
  double phase = 0.0;
};

class FourierSum {
 public:
  FourierSum() = default;
  explicit FourierSum(Index dim) : dim_(dim) {}
  FourierSum(Index dim, std::vector<FourierTerm> terms);

  /// Validates the frequency length, k ≠ 0 and the phase set.
  void add(FourierTerm term);

  Index dim() const { return dim_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  FourierSum scaled(double alpha) const;

 private:
  Index dim_ = 0;
  std::vector<FourierTerm> terms_;
};

/// Σ |γ| (1 + π|k|₁)^s.
double barron_norm(const FourierSum& u, double s);

/// ∂_j u for j = 0..d-1, each again a FourierSum (phase shifted by ½).
std::vector<FourierSum> grad_fourier(const FourierSum& u);

/// Fourier form of the model-problem solutions. Dirichlet is only
/// available for d ≤ 2 (the sine product expands into cosines there).
FourierSum fourier_form(ProblemKind kind, Index dim);

/// Scalar function on [-1,1] with ‖g^{(s)}‖∞ ≤ bound for s = 0..3.
struct Ridge1D {
  std::function<double(double)> g;
  std::function<double(double)> dg;
  double bound = 0.0;
};

/// amplitude · cos(π(freq·z + phase)).
Ridge1D cosine_ridge(double amplitude, double freq, double phase);

/// c + Σ a_i σ(ε_i (z - z_i)) on knots z_i, for σ = ReLU or ReQU.
struct RidgeNet1D {
  Activation activation = activations::relu;
  double h = 0.0;
  double c = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd knots;
  Eigen::VectorXd eps;  // ±1

  Index size() const { return a.size(); }
  double value(double z) const;
  double derivative(double z) const;
  double coeff_sum() const { return a.cwiseAbs().sum(); }
};

/// Piecewise-linear interpolant of g on the uniform mesh z_i = -1 + i/m,
/// written with 2m ReLU neurons. Throws std::invalid_argument if
/// |g'(0)| ≥ 1e-10 or m < 1.
RidgeNet1D relu_interpolant(const Ridge1D& ridge, Index m);

/// Replaces each ReLU by (ReQU(y+h) - ReQU(y-h)) / 4h and merges shared
/// knots: 2m+4 ReQU neurons, all knots in [-1,1].
RidgeNet1D relu_to_requ(const RidgeNet1D& relu);

struct SupErrors {
  double value = 0.0;
  double derivative = 0.0;
  double w1inf() const { return std::max(value, derivative); }
};

/// Sup of |g - net| and |g' - net'| over 10⁴+1 uniform points of [-1,1]
/// plus every knot and knot ± h.
SupErrors sup_errors(const Ridge1D& ridge, const RidgeNet1D& net);

/// Two-layer network (d inputs) realising net(ω·x) with unit-box weights.
/// The width equals net.size(); coefficients are not box-checked.
std::pair<TwoLayerSpec, ParamVector> ridge_to_two_layer(const RidgeNet1D& net,
                                                        const Eigen::VectorXd& omega);

struct AssembledNetwork {
  TwoLayerSpec spec;
  ParamVector params;
  double barron = 0.0;      // ‖u‖ with s = 3, also the box scale B
  Index atoms = 0;          // sampled atoms
  Index grid = 0;           // ridge mesh parameter
};

/// Samples m_atoms ridge atoms of u with probability ∝ atom mass, converts
/// each through relu_interpolant + relu_to_requ on an m_grid mesh and
/// averages them into one two-layer ReQU network inside the box
/// |c| ≤ 2B, |a| ≤ 8B, ‖ω‖₂ ≤ 1, |b| ≤ 1 with B = barron_norm(u, 3).
AssembledNetwork assemble_requ_network(const FourierSum& u, Index m_atoms, Index m_grid,
                                       std::uint64_t seed);

/// Number of parameters violating the box of `spec` (tolerance 1e-12).
Index box_violations(const TwoLayerSpec& spec, const ParamVector& params);

/// Monte-Carlo H¹([0,1]^d) distance between u and a network.
double h1_error(const FourierSum& u, const NetworkSpec& spec, const ParamVector& params,
                Index n_points, std::uint64_t seed);

/// (8d + 32√d + 26) B / √m.
double h1_rate_bound(Index dim, double barron, Index m);

}  // namespace mixres
