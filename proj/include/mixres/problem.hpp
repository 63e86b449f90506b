#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mixres/jet.hpp"

namespace mixres {

enum class ProblemKind { dirichlet, neumann };

std::string to_string(ProblemKind k);
ProblemKind parse_problem(std::string_view name);

/// Value, gradient and Hessian of an analytic solution at a point.
struct SolutionDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Elliptic model problem on [0,1]^d:
///   dirichlet:  -Δu = f in Ω,      u = g on ∂Ω
///   neumann:    -Δu + u = f in Ω,  ∂u/∂n = g on ∂Ω
/// The callables are plain data so tests can build custom problems.
struct Problem {
  ProblemKind kind = ProblemKind::dirichlet;
  Index dim = 2;
  std::function<SolutionDerivatives(const Eigen::VectorXd&)> solution;
  std::function<double(const Eigen::VectorXd&)> source;
  std::function<double(const Eigen::VectorXd&)> boundary;
};

/// u*(x) = Π sin(π x_i), f = dπ² u*, g = 0.
Problem dirichlet_problem(Index dim);
/// u*(x) = Σ cos(π x_i), f = (π² + 1) u*, g = 0.
Problem neumann_problem(Index dim);
Problem make_problem(ProblemKind kind, Index dim);

/// Closed-form jet of the analytic solution.
Jetd exact_jet(const Problem& problem, const Eigen::VectorXd& x);

/// Interior and boundary samples. Columns are points. Weights, when
/// present, sum to one and replace the uniform 1/n averages in losses.
struct SampleBatch {
  Eigen::MatrixXd interior;   // d × n, in (0,1)^d
  Eigen::MatrixXd boundary;   // d × n̄, on ∂Ω
  Eigen::MatrixXd normals;    // d × n̄, outward unit normals ±e_k
  Eigen::VectorXd interior_weights;
  Eigen::VectorXd boundary_weights;
  std::uint64_t seed = 0;

  Index dim() const { return interior.rows(); }
  Index interior_size() const { return interior.cols(); }
  Index boundary_size() const { return boundary.cols(); }
};

/// n i.i.d. uniform points in the open cube (0,1)^d.
Eigen::MatrixXd sample_interior(Index n, Index dim, std::mt19937_64& rng);

struct BoundarySamples {
  Eigen::MatrixXd points;
  Eigen::MatrixXd normals;
};

/// n̄ points uniform on ∂[0,1]^d: a face is picked uniformly among the 2d
/// faces (they have equal measure), then a point uniformly on that face.
BoundarySamples sample_boundary(Index n, Index dim, std::mt19937_64& rng);

/// Minimum boundary batch size ⌈n/d²⌉ (at least 1).
Index min_boundary_size(Index n, Index dim);

/// Fresh batch from `seed`; throws std::invalid_argument if nbar < ⌈n/d²⌉.
SampleBatch sample_batch(Index n, Index nbar, Index dim, std::uint64_t seed);

/// Deterministic child seed for stream `index` of `seed` (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mixres
