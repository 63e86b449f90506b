#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mixres/rademacher.hpp"

using namespace mixres;
using std::numbers::pi;

namespace {

// Mean over all sign patterns of sup_{|ω|=1,|b|≤1} |ω·s + b t|, the sup found by a dense angle scan (d = 2).
double scanned_linear_complexity(const Eigen::MatrixXd& x) {
  const Index n = x.cols();
  double total = 0;
  for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    double t = 0;
    for (Index i = 0; i < n; ++i) {
      const double e = (mask >> i) & 1u ? 1.0 : -1.0;
      s += e * x.col(i) / double(n);
      t += e / double(n);
    }
    double best = 0;
    for (int a = 0; a < 20000; ++a) {
      const double th = 2 * pi * a / 20000.0;
      for (double b : {-1.0, 1.0}) best = std::max(best, std::abs(std::cos(th) * s[0] + std::sin(th) * s[1] + b * t));
    }
    total += best;
  }
  return total / double(1u << n);
}

}  // namespace

TEST(Rademacher, SinglePointLinearClass) {
  Eigen::MatrixXd x(1, 1);
  x << 0.7;
  std::mt19937_64 rng(0);
  const ComplexityEstimate e = rc_linear_exact(x, 2, rng);
  EXPECT_EQ(e.kind, EstimateKind::exhaustive);
  EXPECT_DOUBLE_EQ(e.mean, 1.7);
  EXPECT_DOUBLE_EQ(rc_linear_exhaustive(x), 1.7);
}

TEST(Rademacher, ClosedFormSupMatchesAngleScan) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = sample_interior(8, 2, rng);
  EXPECT_NEAR(rc_linear_exhaustive(x), scanned_linear_complexity(x), 1e-7);
}

TEST(Rademacher, ExhaustiveAgreesWithFullSignCoverage) {
  for (Index n : {3, 7, 12}) {
    std::mt19937_64 rng(n);
    const Eigen::MatrixXd x = sample_interior(n, 3, rng);
    const ComplexityEstimate e = rc_linear_exact(x, Index(1) << n, rng);
    ASSERT_EQ(e.kind, EstimateKind::exhaustive);
    EXPECT_NEAR(e.mean, rc_linear_exhaustive(x), 1e-12);
    // an independent enumeration order
    double s = 0;
    for (std::uint64_t mask = (std::uint64_t(1) << n); mask-- > 0;) {
      Eigen::VectorXd eps(n);
      for (Index i = 0; i < n; ++i) eps[i] = (mask >> i) & 1u ? -1.0 : 1.0;
      s += (x * eps / double(n)).norm() + std::abs(eps.mean());
    }
    EXPECT_NEAR(e.mean, s / double(std::uint64_t(1) << n), 1e-12);
  }
}

TEST(Rademacher, LinearClassBelowBound) {
  for (Index d : {1, 2, 5, 10})
    for (Index n : {10, 100, 1000}) {
      std::mt19937_64 rng(d * 1000 + n);
      const Eigen::MatrixXd x = sample_interior(n, d, rng);
      const ComplexityEstimate e = rc_linear_exact(x, 500, rng);
      EXPECT_LE(e.mean, rc_linear_bound(d, n)) << "d=" << d << " n=" << n;
    }
}

TEST(Rademacher, LinearClassScalesLikeInverseRootN) {
  std::vector<double> ns, est;
  for (int k = 4; k <= 12; ++k) {
    const Index n = Index(1) << k;
    std::mt19937_64 rng(k);
    const Eigen::MatrixXd x = sample_interior(n, 2, rng);
    ns.push_back(double(n));
    est.push_back(rc_linear_exact(x, 400, rng).mean);
  }
  const double slope = fit_loglog_slope(ns, est);
  EXPECT_GE(slope, -0.6);
  EXPECT_LE(slope, -0.4);
}

TEST(Rademacher, DegenerateNetworkClassIsZero) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = sample_interior(20, 2, rng);
  const ComplexityEstimate e = rc_network_lower_bound(TwoLayerSpec{2, 5, 1, 0.0}, x, 10, 2, rng);
  EXPECT_EQ(e.mean, 0.0);
}

TEST(Rademacher, NetworkLowerBoundBelowUpperBound) {
  for (Index d : {1, 2, 5})
    for (Index n : {16, 128, 1024})
      for (double B : {0.5, 3.0}) {
        std::mt19937_64 rng(d + n);
        const Eigen::MatrixXd x = sample_interior(n, d, rng);
        const ComplexityEstimate e = rc_network_lower_bound(TwoLayerSpec{d, 10, 1, B}, x, 20, 2, rng);
        EXPECT_GT(e.mean, 0.0);
        EXPECT_LE(e.mean, rc_network_bound(d, B, n));
      }
}

TEST(Rademacher, NetworkBoundScalesWithB) {
  std::mt19937_64 data(3);
  const Eigen::MatrixXd x = sample_interior(200, 2, data);
  std::mt19937_64 r1(4), r2(4);
  const double a = rc_network_lower_bound(TwoLayerSpec{2, 10, 1, 1.0}, x, 30, 3, r1).mean;
  const double b = rc_network_lower_bound(TwoLayerSpec{2, 10, 1, 2.0}, x, 30, 3, r2).mean;
  EXPECT_GE(b / a, 1.8);
}

TEST(Rademacher, ComplexityConstants) {
  EXPECT_DOUBLE_EQ(requ_lipschitz(4), 6.0);
  const double l1 = 2 * (std::sqrt(2.0) + 1);
  EXPECT_NEAR(network_complexity_constant(2), 16 * l1 + 2 + 16 * l1 * std::sqrt(4 * std::log(4.0)), 1e-12);
  EXPECT_NEAR(rc_linear_bound(2, 100), (std::sqrt(4 * std::log(4.0)) + 1) / 10, 1e-15);
}

TEST(Rademacher, CalculationRulesOnFiniteClasses) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const Index n = 10;
  Eigen::MatrixXd F(3, n), G(4, n);
  for (auto& v : F.reshaped()) v = g(rng);
  for (auto& v : G.reshaped()) v = g(rng);
  Eigen::MatrixXd sum(12, n);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) sum.row(i * 4 + j) = F.row(i) + G.row(j);
  EXPECT_LE(rc_finite_exhaustive(sum), rc_finite_exhaustive(F) + rc_finite_exhaustive(G) + 1e-12);
  EXPECT_NEAR(rc_finite_exhaustive(-2.5 * F), 2.5 * rc_finite_exhaustive(F), 1e-12);
  // one fixed function bounded by b: complexity ≤ b / √n
  Eigen::MatrixXd one(1, n);
  for (Index i = 0; i < n; ++i) one(0, i) = std::sin(double(i));
  EXPECT_LE(rc_finite_exhaustive(one), one.cwiseAbs().maxCoeff() / std::sqrt(double(n)));
}

TEST(Rademacher, ConstantIntegrandsHaveNoGap) {
  Problem p = dirichlet_problem(2);
  p.source = [](const Eigen::VectorXd&) { return 3.0; };
  p.boundary = [](const Eigen::VectorXd&) { return 0.5; };
  const FunctionField phi = constant_field(2, Eigen::VectorXd::Constant(1, 2.0));
  const FunctionField psi = constant_field(2, Eigen::VectorXd::Zero(2));
  const GapCurve c = quadrature_gap(Method::mix, phi, &psi, p, {}, {8, 64, 512}, 4, 1);
  EXPECT_NEAR(c.reference, 9.0 + 2.25, 1e-12);
  for (const auto& pt : c.points) EXPECT_LE(pt.gap_mean, 1e-12);
}

TEST(Rademacher, GapCurveIsDeterministic) {
  const Problem p = neumann_problem(2);
  const ResNetSpec s{2, 4, 2, 1};
  std::mt19937_64 r(6);
  const ParamVector w = init_params(s, r);
  const NetworkField phi(s, w);
  const GapCurve a = quadrature_gap(Method::dgm, phi, nullptr, p, {}, {32, 128}, 8, 3);
  const GapCurve b = quadrature_gap(Method::dgm, phi, nullptr, p, {}, {32, 128}, 8, 3);
  ASSERT_EQ(a.points.size(), 2u);
  EXPECT_EQ(a.points[1].gap_mean, b.points[1].gap_mean);
  EXPECT_GT(a.points[0].gap_mean, 0.0);
}

TEST(Rademacher, LogLogSlopeOfPowerLaw) {
  EXPECT_NEAR(fit_loglog_slope({1, 2, 4, 8}, {3, 3 / std::sqrt(2.0), 1.5, 3 / std::sqrt(8.0)}), -0.5, 1e-12);
  EXPECT_THROW(fit_loglog_slope({1}, {1}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({1, 2}, {1, 0}), std::invalid_argument);
}
