#include "mixres/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixres {

using std::numbers::pi;

std::string to_string(ProblemKind k) { return k == ProblemKind::dirichlet ? "dirichlet" : "neumann"; }

ProblemKind parse_problem(std::string_view name) {
  if (name == "dirichlet") return ProblemKind::dirichlet;
  if (name == "neumann") return ProblemKind::neumann;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "' (expected dirichlet|neumann)");
}

Problem dirichlet_problem(Index dim) {
  Problem p;
  p.kind = ProblemKind::dirichlet;
  p.dim = dim;
  p.solution = [dim](const Eigen::VectorXd& x) {
    const Eigen::ArrayXd s = (pi * x.array()).sin();
    const Eigen::ArrayXd c = (pi * x.array()).cos();
    SolutionDerivatives out;
    out.value = s.prod();
    out.gradient.resize(dim);
    out.hessian.resize(dim, dim);
    for (Index k = 0; k < dim; ++k) {
      double gk = pi * c[k];
      for (Index j = 0; j < dim; ++j)
        if (j != k) gk *= s[j];
      out.gradient[k] = gk;
      for (Index l = 0; l < dim; ++l) {
        if (l == k) {
          out.hessian(k, k) = -pi * pi * out.value;
          continue;
        }
        double h = pi * pi * c[k] * c[l];
        for (Index j = 0; j < dim; ++j)
          if (j != k && j != l) h *= s[j];
        out.hessian(k, l) = h;
      }
    }
    return out;
  };
  p.source = [dim](const Eigen::VectorXd& x) {
    return static_cast<double>(dim) * pi * pi * (pi * x.array()).sin().prod();
  };
  p.boundary = [](const Eigen::VectorXd&) { return 0.0; };
  return p;
}

Problem neumann_problem(Index dim) {
  Problem p;
  p.kind = ProblemKind::neumann;
  p.dim = dim;
  p.solution = [dim](const Eigen::VectorXd& x) {
    SolutionDerivatives out;
    out.value = (pi * x.array()).cos().sum();
    out.gradient = -pi * (pi * x.array()).sin().matrix();
    out.hessian = Eigen::MatrixXd::Zero(dim, dim);
    out.hessian.diagonal() = -pi * pi * (pi * x.array()).cos().matrix();
    return out;
  };
  p.source = [](const Eigen::VectorXd& x) { return (pi * pi + 1.0) * (pi * x.array()).cos().sum(); };
  p.boundary = [](const Eigen::VectorXd&) { return 0.0; };
  return p;
}

Problem make_problem(ProblemKind kind, Index dim) {
  if (dim < 1) throw std::invalid_argument("problem dimension must be positive");
  return kind == ProblemKind::dirichlet ? dirichlet_problem(dim) : neumann_problem(dim);
}

Jetd exact_jet(const Problem& problem, const Eigen::VectorXd& x) {
  const SolutionDerivatives s = problem.solution(x);
  Jetd j;
  j.value = s.value;
  j.gradient = s.gradient;
  j.laplacian = s.hessian.trace();
  return j;
}

Eigen::MatrixXd sample_interior(Index n, Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(dim, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < dim; ++k) {
      double v = u(rng);
      while (v == 0.0) v = u(rng);
      x(k, i) = v;
    }
  return x;
}

BoundarySamples sample_boundary(Index n, Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<Index> face(0, 2 * dim - 1);
  BoundarySamples out{Eigen::MatrixXd(dim, n), Eigen::MatrixXd::Zero(dim, n)};
  for (Index i = 0; i < n; ++i) {
    const Index f = face(rng);
    const Index axis = f / 2;
    const bool upper = (f % 2) == 1;
    for (Index k = 0; k < dim; ++k) out.points(k, i) = u(rng);
    out.points(axis, i) = upper ? 1.0 : 0.0;
    out.normals(axis, i) = upper ? 1.0 : -1.0;
  }
  return out;
}

Index min_boundary_size(Index n, Index dim) {
  const Index d2 = dim * dim;
  return std::max<Index>(1, (n + d2 - 1) / d2);
}

SampleBatch sample_batch(Index n, Index nbar, Index dim, std::uint64_t seed) {
  if (n < 1 || nbar < 1) throw std::invalid_argument("batch sizes must be positive");
  if (nbar < min_boundary_size(n, dim))
    throw std::invalid_argument("boundary batch " + std::to_string(nbar) + " is below ceil(n/d^2) = " +
                                std::to_string(min_boundary_size(n, dim)));
  std::mt19937_64 rng(seed);
  SampleBatch b;
  b.seed = seed;
  b.interior = sample_interior(n, dim, rng);
  auto bd = sample_boundary(nbar, dim, rng);
  b.boundary = std::move(bd.points);
  b.normals = std::move(bd.normals);
  return b;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mixres
