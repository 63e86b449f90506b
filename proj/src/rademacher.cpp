#include "mixres/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixres {

namespace {

struct RunningMean {
  double sum = 0.0;
  double sum_sq = 0.0;
  Index count = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double std_err() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(count) * m * m) / static_cast<double>(count - 1));
    return std::sqrt(var / static_cast<double>(count));
  }
};

Eigen::VectorXd draw_signs(Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd e(n);
  for (Index i = 0; i < n; ++i) e[i] = coin(rng) ? 1.0 : -1.0;
  return e;
}

Eigen::VectorXd signs_from_mask(Index n, std::uint64_t mask) {
  Eigen::VectorXd e(n);
  for (Index i = 0; i < n; ++i) e[i] = (mask >> i) & 1U ? 1.0 : -1.0;
  return e;
}

double linear_sup(const Eigen::MatrixXd& x, const Eigen::VectorXd& eps) {
  const double inv_n = 1.0 / static_cast<double>(x.cols());
  return (x * eps * inv_n).norm() + std::abs(eps.sum() * inv_n);
}

constexpr Index max_exhaustive = 24;

}  // namespace

ComplexityEstimate rc_linear_exact(const Eigen::MatrixXd& points, Index n_eps, std::mt19937_64& rng) {
  const Index n = points.cols();
  if (n < 1) throw std::invalid_argument("rc_linear_exact: need at least one point");
  if (n_eps < 1) throw std::invalid_argument("rc_linear_exact: need at least one sign draw");
  ComplexityEstimate est;
  est.n = n;
  if (n <= max_exhaustive && static_cast<double>(n_eps) >= std::ldexp(1.0, static_cast<int>(n))) {
    est.mean = rc_linear_exhaustive(points);
    est.n_eps = Index(1) << n;
    est.kind = EstimateKind::exhaustive;
    return est;
  }
  RunningMean acc;
  for (Index r = 0; r < n_eps; ++r) acc.add(linear_sup(points, draw_signs(n, rng)));
  est.mean = acc.mean();
  est.std_err = acc.std_err();
  est.n_eps = n_eps;
  return est;
}

double rc_linear_exhaustive(const Eigen::MatrixXd& points) {
  const Index n = points.cols();
  if (n < 1 || n > max_exhaustive) throw std::invalid_argument("rc_linear_exhaustive: need 1 <= n <= 24");
  const std::uint64_t patterns = std::uint64_t(1) << n;
  double sum = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) sum += linear_sup(points, signs_from_mask(n, mask));
  return sum / static_cast<double>(patterns);
}

double rc_linear_bound(Index dim, Index n) {
  const double d = static_cast<double>(dim);
  return (std::sqrt(2.0 * d * std::log(2.0 * d)) + 1.0) / std::sqrt(static_cast<double>(n));
}

double requ_lipschitz(Index dim) { return 2.0 * (std::sqrt(static_cast<double>(dim)) + 1.0); }

double network_complexity_constant(Index dim) {
  const double d = static_cast<double>(dim), l1 = requ_lipschitz(dim);
  return 16.0 * l1 + 2.0 + 16.0 * l1 * std::sqrt(2.0 * d * std::log(2.0 * d));
}

double rc_network_bound(Index dim, double barron, Index n) {
  return network_complexity_constant(dim) * barron / std::sqrt(static_cast<double>(n));
}

namespace {

// max over ‖ω‖ ≤ 1, |b| ≤ 1 of sign · n⁻¹Σ ε_i σ(ω·x_i + b), by projected ascent
double neuron_ascent(const Eigen::MatrixXd& x, const Eigen::VectorXd& eps, Activation act, double sign,
                     Eigen::VectorXd omega, double b) {
  const Index n = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  auto objective = [&](const Eigen::VectorXd& w, double bb) {
    const Eigen::ArrayXd z = (x.transpose() * w).array() + bb;
    return sign * inv_n * (eps.array() * activate(act, 0, z).col(0)).sum();
  };
  double best = objective(omega, b);
  double step = 0.5;
  for (int it = 0; it < 200 && step > 1e-6; ++it) {
    const Eigen::ArrayXd z = (x.transpose() * omega).array() + b;
    const Eigen::VectorXd s = (sign * inv_n * eps.array() * activate(act, 1, z).col(0)).matrix();
    Eigen::VectorXd gw = x * s;
    double gb = s.sum();
    const double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (gnorm == 0.0) break;
    Eigen::VectorXd w2 = omega + step * gw / gnorm;
    if (w2.norm() > 1.0) w2.normalize();
    const double b2 = std::clamp(b + step * gb / gnorm, -1.0, 1.0);
    const double val = objective(w2, b2);
    if (val > best) {
      best = val;
      omega = w2;
      b = b2;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

}  // namespace

ComplexityEstimate rc_network_lower_bound(const TwoLayerSpec& spec, const Eigen::MatrixXd& points, Index n_eps,
                                          Index restarts, std::mt19937_64& rng) {
  validate(NetworkSpec(spec));
  const Index n = points.cols(), d = points.rows();
  if (d != spec.input_dim) throw std::invalid_argument("rc_network_lower_bound: point dimension mismatch");
  if (n < 1 || n_eps < 1 || restarts < 1) throw std::invalid_argument("rc_network_lower_bound: bad sizes");
  const double B = spec.barron_bound;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  RunningMean acc;
  for (Index r = 0; r < n_eps; ++r) {
    const Eigen::VectorXd eps = draw_signs(n, rng);
    double inner = 0.0;
    for (Index s = 0; s < restarts; ++s) {
      Eigen::VectorXd w(d);
      for (Index k = 0; k < d; ++k) w[k] = normal(rng);
      w *= std::pow(std::abs(unif(rng)), 1.0 / static_cast<double>(d)) / std::max(w.norm(), 1e-300);
      const double b = unif(rng);
      inner = std::max({inner, neuron_ascent(points, eps, spec.activation, 1.0, w, b),
                        neuron_ascent(points, eps, spec.activation, -1.0, w, b)});
    }
    acc.add(2.0 * B * std::abs(eps.mean()) + 8.0 * B * inner);
  }
  ComplexityEstimate est;
  est.mean = acc.mean();
  est.std_err = acc.std_err();
  est.n = n;
  est.n_eps = n_eps;
  est.kind = EstimateKind::ascent_lower_bound;
  return est;
}

double rc_finite_exhaustive(const Eigen::MatrixXd& values) {
  const Index n = values.cols();
  if (n < 1 || n > max_exhaustive || values.rows() < 1)
    throw std::invalid_argument("rc_finite_exhaustive: need a non-empty class and 1 <= n <= 24");
  const std::uint64_t patterns = std::uint64_t(1) << n;
  double sum = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask)
    sum += (values * signs_from_mask(n, mask)).cwiseAbs().maxCoeff() / static_cast<double>(n);
  return sum / static_cast<double>(patterns);
}

double reference_loss(Method method, const Field& phi, const Field* psi, const Problem& problem,
                      const LossWeights& weights, std::uint64_t seed) {
  const SampleBatch ref = problem.dim <= 3 ? gauss_legendre_batch(problem.dim, 64)
                                           : monte_carlo_batch(1000000, 1000000, problem.dim, seed);
  return method_loss_chunked(method, phi, psi, problem, ref, weights).total;
}

GapCurve quadrature_gap(Method method, const Field& phi, const Field* psi, const Problem& problem,
                        const LossWeights& weights, const std::vector<Index>& n_values, Index trials,
                        std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("quadrature_gap: trials must be >= 1");
  GapCurve curve;
  curve.reference = reference_loss(method, phi, psi, problem, weights, seed);
  const Index d2 = problem.dim * problem.dim;
  for (Index n : n_values) {
    const Index nbar = std::max<Index>((n + d2 - 1) / d2, 1);
    RunningMean acc;
    for (Index t = 0; t < trials; ++t) {
      const SampleBatch batch =
          sample_batch(n, nbar, problem.dim, derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)), t));
      acc.add(std::abs(method_loss(method, phi, psi, problem, batch, weights).total - curve.reference));
    }
    curve.points.push_back({n, acc.mean(), acc.std_err()});
  }
  return curve;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace mixres
