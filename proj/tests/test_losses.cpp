#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fd_oracle.hpp"
#include "mixres/losses.hpp"

using namespace mixres;
using mixres::testing::fd_param_gradient;
using std::numbers::pi;

namespace {

double mean_f_squared(const Problem& p, const Eigen::MatrixXd& x) {
  double s = 0;
  for (Index i = 0; i < x.cols(); ++i) {
    const double f = p.source(x.col(i));
    s += f * f;
  }
  return s / double(x.cols());
}

// Gradient field of a two-layer ReQU network, written out by hand:
// ∇φ = (1/m) Σ a_i 2 (ω_i·x + b_i)_+ ω_i.
FunctionField two_layer_requ_gradient(const TwoLayerSpec& s, const ParamVector& p) {
  const Index d = s.input_dim, m = s.width;
  return FunctionField(d, d, [s, p, d, m](const Eigen::MatrixXd& x, JetOrder order) {
    JetBatch out(d, x.cols(), d, order);
    for (Index i = 0; i < x.cols(); ++i)
      for (Index j = 0; j < m; ++j) {
        const double a = p[1 + j], b = p[1 + m + m * d + j];
        const Eigen::VectorXd w = p.segment(1 + m + j * d, d);
        const double z = w.dot(x.col(i)) + b;
        if (z <= 0) continue;
        out.value().col(i) += (2.0 * a * z / double(m)) * w;
        if (out.has_gradient())
          for (Index k = 0; k < d; ++k) out.gradient(k).col(i) += (2.0 * a * w[k] / double(m)) * w;
      }
    return out;
  });
}

}  // namespace

TEST(Losses, ExactSolutionAnnihilatesAllResiduals) {
  for (ProblemKind k : {ProblemKind::dirichlet, ProblemKind::neumann})
    for (Index d : {2, 5}) {
      const Problem p = make_problem(k, d);
      const SampleBatch b = sample_batch(300, 300, d, 5);
      const FunctionField u = solution_field(p), grad = flux_field(p);
      const LossBreakdown mix = mix_loss(u, grad, p, b, {});
      EXPECT_LE(std::abs(mix.total), 1e-20);
      EXPECT_LE(std::abs(mix.r_g) + std::abs(mix.r_e) + std::abs(mix.r_b), 1e-20);
      const LossBreakdown dgm = dgm_loss(u, p, b, {});
      EXPECT_LE(std::abs(dgm.total), 1e-20) << to_string(k) << " d=" << d;
    }
}

TEST(Losses, MixOfZeroFieldsIsMeanSourceSquared) {
  const Problem p = dirichlet_problem(2);
  const SampleBatch b = sample_batch(500, 500, 2, 3);
  const FunctionField zero = constant_field(2, Eigen::VectorXd::Zero(1));
  const FunctionField zero2 = constant_field(2, Eigen::VectorXd::Zero(2));
  const LossBreakdown l = mix_loss(zero, zero2, p, b, {});
  const double ref = mean_f_squared(p, b.interior);
  EXPECT_NEAR(l.total, ref, 1e-12 * ref);
  EXPECT_EQ(l.r_g, 0.0);
  EXPECT_EQ(l.r_b, 0.0);
}

TEST(Losses, MixWeightsCombineTerms) {
  const Problem p = neumann_problem(3);
  const SampleBatch b = sample_batch(200, 100, 3, 4);
  const FunctionField phi = solution_field(p, 0.5), psi = flux_field(p, 1.5);
  const LossBreakdown l = mix_loss(phi, psi, p, b, {0.3, 7.0, 1.0});
  EXPECT_GT(l.r_g, 0.0);
  EXPECT_GT(l.r_e, 0.0);
  EXPECT_GT(l.r_b, 0.0);
  EXPECT_NEAR(l.total, l.r_g + 0.3 * l.r_e + 7.0 * l.r_b, 1e-13 * l.total);
}

TEST(Losses, MixGradientMismatchVanishesForTrueGradient) {
  const TwoLayerSpec s{2, 6, 1, 1.0, activations::requ};
  std::mt19937_64 rng(2);
  const ParamVector p = init_params(s, rng);
  const NetworkField phi(s, p);
  const FunctionField psi = two_layer_requ_gradient(s, p);
  const LossBreakdown l = mix_loss(phi, psi, dirichlet_problem(2), sample_batch(200, 200, 2, 9), {});
  EXPECT_LE(l.r_g, 1e-28);
}

TEST(Losses, DrmOfZeroIsZero) {
  for (ProblemKind k : {ProblemKind::dirichlet, ProblemKind::neumann}) {
    const Problem p = make_problem(k, 2);
    const LossBreakdown l =
        drm_loss(constant_field(2, Eigen::VectorXd::Zero(1)), p, sample_batch(100, 100, 2, 1), {1, 1, 500});
    EXPECT_EQ(l.total, 0.0);
    EXPECT_EQ(l.r_e, 0.0);
    EXPECT_EQ(l.r_b, 0.0);
  }
}

TEST(Losses, DrmEnergyOfSolutionIsMinusPiSquaredOverFour) {
  const Problem p = dirichlet_problem(2);
  const SampleBatch b = monte_carlo_batch(1000000, 250000, 2, 17);
  const FunctionField u = solution_field(p);
  const LossBreakdown l = method_loss_chunked(Method::drm, u, nullptr, p, b, {1, 1, 500});
  // integrand ½|∇u|² − f u has standard deviation below 10 on [0,1]²
  EXPECT_NEAR(l.r_e, -pi * pi / 4, 5 * 10.0 / 1000.0);
  EXPECT_NEAR(l.r_b, 0.0, 1e-25);
  // Gauss–Legendre removes the sampling error
  const LossBreakdown g = method_loss_chunked(Method::drm, u, nullptr, p, gauss_legendre_batch(2, 32), {1, 1, 500});
  EXPECT_NEAR(g.total, -pi * pi / 4, 1e-12);
}

TEST(Losses, DrmSolutionBeatsZeroAndScaledSolutions) {
  const Problem p = dirichlet_problem(2);
  const SampleBatch gl = gauss_legendre_batch(2, 32);
  auto energy = [&](double c) {
    return method_loss_chunked(Method::drm, solution_field(p, c), nullptr, p, gl, {1, 1, 500}).total;
  };
  // J(c u*) = (c²/2 − c)·π²/2 is minimised at c = 1
  for (double c : {0.0, 0.5, 1.5, 2.0}) EXPECT_NEAR(energy(c), (c * c / 2 - c) * pi * pi / 2, 1e-11);
  EXPECT_LT(energy(1.0), energy(0.0));
}

TEST(Losses, DrmNeumannEnergyOfSolution) {
  // J(u*) = −½∫(|∇u*|² + u*²) for g = 0; cross terms ∫cos(πx_i)cos(πx_j) vanish, leaving −½(dπ²/2 + d/2)
  const Index d = 2;
  const Problem p = neumann_problem(d);
  const LossBreakdown l =
      method_loss_chunked(Method::drm, solution_field(p), nullptr, p, gauss_legendre_batch(d, 32), {});
  EXPECT_NEAR(l.total, -0.5 * (d * pi * pi / 2 + d / 2.0), 1e-12);
}

TEST(Losses, DrmNeumannBoundaryTermUsesSurfaceMeasure) {
  // u* = x₁², f = x₁² − 2, ∂u/∂n = 2 on the face x₁ = 1 and 0 elsewhere;
  // J(u*) = −½∫(|∇u*|² + u*²) = −½(4/3 + 1/5) = −23/30
  Problem p;
  p.kind = ProblemKind::neumann;
  p.dim = 2;
  p.solution = [](const Eigen::VectorXd& x) {
    SolutionDerivatives s;
    s.value = x[0] * x[0];
    s.gradient = Eigen::Vector2d(2.0 * x[0], 0.0);
    s.hessian = Eigen::Matrix2d::Zero();
    s.hessian(0, 0) = 2.0;
    return s;
  };
  p.source = [](const Eigen::VectorXd& x) { return x[0] * x[0] - 2.0; };
  p.boundary = [](const Eigen::VectorXd& x) { return x[0] > 1.0 - 1e-12 ? 2.0 : 0.0; };
  const LossBreakdown l =
      method_loss_chunked(Method::drm, solution_field(p), nullptr, p, gauss_legendre_batch(2, 16), {});
  EXPECT_NEAR(l.total, -23.0 / 30.0, 1e-12);
}

TEST(Losses, DgmOfZeroIsMeanSourceSquared) {
  const Problem p = dirichlet_problem(3);
  const SampleBatch b = sample_batch(400, 400, 3, 6);
  const LossBreakdown l = dgm_loss(constant_field(3, Eigen::VectorXd::Zero(1)), p, b, {});
  const double ref = mean_f_squared(p, b.interior);
  EXPECT_NEAR(l.total, ref, 1e-12 * ref);
}

TEST(Losses, DgmNeumannConstantShift) {
  const Problem p = neumann_problem(2);
  const SampleBatch b = sample_batch(300, 300, 2, 8);
  const double c = 0.7;
  const FunctionField u = solution_field(p);
  const FunctionField shifted(2, 1, [&](const Eigen::MatrixXd& x, JetOrder order) {
    JetBatch j = u.evaluate(x, order, nullptr).jets;
    j.value().array() += c;
    return j;
  });
  const LossBreakdown l = dgm_loss(shifted, p, b, {1, 1, 3});
  EXPECT_NEAR(l.r_e, c * c, 1e-12);
  EXPECT_NEAR(l.r_b, 0.0, 1e-25);
}

TEST(Losses, RelativeErrorsOfSimpleFields) {
  for (ProblemKind k : {ProblemKind::dirichlet, ProblemKind::neumann}) {
    const Problem p = make_problem(k, 2);
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd x = sample_interior(1000, 2, rng);
    const RelativeErrors exact = relative_errors(solution_field(p), nullptr, p, x);
    EXPECT_NEAR(exact.e0, 0.0, 1e-14);
    EXPECT_NEAR(exact.e1, 0.0, 1e-14);
    EXPECT_NEAR(exact.e2, 0.0, 1e-14);
    const RelativeErrors twice = relative_errors(solution_field(p, 2.0), nullptr, p, x);
    EXPECT_NEAR(twice.e0, 1.0, 1e-14);
    EXPECT_NEAR(twice.e1, 1.0, 1e-14);
    EXPECT_NEAR(twice.e2, 1.0, 1e-14);
    const FunctionField zero = constant_field(2, Eigen::VectorXd::Zero(1));
    const RelativeErrors z = relative_errors(zero, nullptr, p, x);
    EXPECT_DOUBLE_EQ(z.e0, 1.0);
    EXPECT_DOUBLE_EQ(z.e1, 1.0);
    EXPECT_DOUBLE_EQ(z.e2, 1.0);
  }
}

TEST(Losses, RelativeErrorsUseFluxForMix) {
  const Problem p = dirichlet_problem(2);
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = sample_interior(500, 2, rng);
  const FunctionField zero_flux = constant_field(2, Eigen::VectorXd::Zero(2));
  // φ exact but ψ ≡ 0: e0 = 0 while e1 = e2 = 1 come from ψ and div ψ
  const RelativeErrors e = relative_errors(solution_field(p), &zero_flux, p, x);
  EXPECT_NEAR(e.e0, 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(e.e1, 1.0);
  EXPECT_DOUBLE_EQ(e.e2, 1.0);
}

TEST(Losses, PermutationInvariance) {
  const Problem p = neumann_problem(2);
  const SampleBatch b = sample_batch(256, 128, 2, 10);
  SampleBatch shuffled = b;
  std::vector<Index> perm(256), bperm(128);
  std::iota(perm.begin(), perm.end(), 0);
  std::iota(bperm.begin(), bperm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::shuffle(bperm.begin(), bperm.end(), rng);
  for (Index i = 0; i < 256; ++i) shuffled.interior.col(i) = b.interior.col(perm[i]);
  for (Index i = 0; i < 128; ++i) {
    shuffled.boundary.col(i) = b.boundary.col(bperm[i]);
    shuffled.normals.col(i) = b.normals.col(bperm[i]);
  }
  const ResNetSpec s1{2, 5, 2, 1}, s2{2, 5, 2, 2};
  std::mt19937_64 r(4);
  const ParamVector p1 = init_params(s1, r), p2 = init_params(s2, r);
  const NetworkField phi(s1, p1), psi(s2, p2);
  const double a = mix_loss(phi, psi, p, b, {}).total, c = mix_loss(phi, psi, p, shuffled, {}).total;
  EXPECT_EQ(a, mix_loss(phi, psi, p, b, {}).total);
  EXPECT_NEAR(a, c, 1e-12 * std::abs(a));
}

TEST(Losses, NonFiniteResidualReportsSample) {
  const Problem p = dirichlet_problem(2);
  const SampleBatch b = sample_batch(10, 10, 2, 1);
  const FunctionField bad(2, 1, [](const Eigen::MatrixXd& x, JetOrder order) {
    JetBatch j(1, x.cols(), 2, order);
    if (j.has_laplacian()) j.laplacian()(0, 3) = std::nan("");
    return j;
  });
  try {
    dgm_loss(bad, p, b, {});
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.sample(), 3);
    EXPECT_FALSE(e.on_boundary());
  }
}

TEST(Losses, TapedGradientsMatchFiniteDifferences) {
  const Problem dp = dirichlet_problem(2), np = neumann_problem(2);
  const SampleBatch b = sample_batch(40, 30, 2, 21);
  const ResNetSpec phi_spec{2, 4, 2, 1, activations::recu}, psi_spec{2, 5, 2, 2, activations::recu};
  std::mt19937_64 rng(6);
  ParamVector p(param_count(phi_spec) + param_count(psi_spec));
  p << init_params(phi_spec, rng), init_params(psi_spec, rng);
  const LossWeights w{0.7, 1.3, 5.0};
  for (Method m : {Method::mix, Method::drm, Method::dgm})
    for (const Problem* prob : {&dp, &np}) {
      auto loss = [&](const ParamVector& q, Tape* tape) {
        const NetworkField phi(phi_spec, q), psi(psi_spec, q, param_count(phi_spec));
        return method_loss(m, phi, &psi, *prob, b, w, tape).total;
      };
      const LossAndGradient lg = loss_gradient(p, [&](Tape& t) { return loss(p, &t); });
      EXPECT_DOUBLE_EQ(lg.value, loss(p, nullptr));
      const Eigen::VectorXd fd = fd_param_gradient([&](const ParamVector& q) { return loss(q, nullptr); }, p, 1e-6);
      const double rel = (lg.gradient - fd).lpNorm<Eigen::Infinity>() / fd.lpNorm<Eigen::Infinity>();
      EXPECT_LT(rel, 1e-5) << to_string(m) << " " << to_string(prob->kind);
    }
}

TEST(Losses, GaussLegendreIsExactForPolynomials) {
  const auto [x, w] = gauss_legendre_01(8);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  for (int k = 0; k <= 15; ++k) EXPECT_NEAR((w.array() * x.array().pow(k)).sum(), 1.0 / (k + 1), 1e-15) << k;
}

TEST(Losses, GaussLegendreBatchWeights) {
  const SampleBatch g = gauss_legendre_batch(3, 6);
  EXPECT_EQ(g.interior_size(), 216);
  EXPECT_EQ(g.boundary_size(), 6 * 36);
  EXPECT_NEAR(g.interior_weights.sum(), 1.0, 1e-14);
  EXPECT_NEAR(g.boundary_weights.sum(), 1.0, 1e-14);
  // ∫ x₁² x₂ x₃³ = 1/3 · 1/2 · 1/4
  double s = 0;
  for (Index i = 0; i < g.interior_size(); ++i)
    s += g.interior_weights[i] * std::pow(g.interior(0, i), 2) * g.interior(1, i) * std::pow(g.interior(2, i), 3);
  EXPECT_NEAR(s, 1.0 / 24, 1e-15);
}

TEST(Losses, ChunkedLossMatchesWeightedSum) {
  const Problem p = neumann_problem(2);
  const SampleBatch mc = monte_carlo_batch(5000, 3000, 2, 2);
  const ResNetSpec s1{2, 5, 2, 1}, s2{2, 5, 2, 2};
  std::mt19937_64 r(4);
  const ParamVector p1 = init_params(s1, r), p2 = init_params(s2, r);
  const NetworkField phi(s1, p1), psi(s2, p2);
  const double whole = method_loss(Method::mix, phi, &psi, p, mc, {}).total;
  const double chunked = method_loss_chunked(Method::mix, phi, &psi, p, mc, {}, 700).total;
  EXPECT_NEAR(whole, chunked, 1e-12 * std::abs(whole));
}

TEST(Losses, MethodNamesRoundTrip) {
  for (const char* name : {"mix", "drm", "dgm"}) EXPECT_EQ(to_string(parse_method(name)), name);
  EXPECT_THROW(parse_method("pinn"), std::invalid_argument);
}
