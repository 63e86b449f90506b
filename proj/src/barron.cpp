#include "mixres/barron.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mixres/autodiff.hpp"

namespace mixres {

using std::numbers::pi;

namespace {

bool valid_phase(double b) { return b == 0.0 || b == 0.5 || b == 1.0 || b == 1.5; }

double wrap_phase(double b) { return std::fmod(b, 2.0); }

double l1(const Eigen::VectorXi& k) { return static_cast<double>(k.cwiseAbs().sum()); }

}  // namespace

FourierSum::FourierSum(Index dim, std::vector<FourierTerm> terms) : dim_(dim) {
  for (auto& t : terms) add(std::move(t));
}

void FourierSum::add(FourierTerm term) {
  if (term.k.size() != dim_) throw std::invalid_argument("fourier term has the wrong dimension");
  if (term.k.isZero()) throw std::invalid_argument("fourier term with zero frequency");
  if (!valid_phase(term.phase)) throw std::invalid_argument("fourier phase must be 0, 1/2, 1 or 3/2");
  terms_.push_back(std::move(term));
}

double FourierSum::value(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.gamma * std::cos(pi * (t.k.cast<double>().dot(x) + t.phase));
  return s;
}

Eigen::VectorXd FourierSum::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& t : terms_)
    g -= t.gamma * pi * std::sin(pi * (t.k.cast<double>().dot(x) + t.phase)) * t.k.cast<double>();
  return g;
}

FourierSum FourierSum::scaled(double alpha) const {
  FourierSum out = *this;
  for (auto& t : out.terms_) t.gamma *= alpha;
  return out;
}

double barron_norm(const FourierSum& u, double s) {
  if (s < 0.0) throw std::invalid_argument("barron_norm: s must be non-negative");
  double n = 0.0;
  for (const auto& t : u.terms()) n += std::abs(t.gamma) * std::pow(1.0 + pi * l1(t.k), s);
  return n;
}

std::vector<FourierSum> grad_fourier(const FourierSum& u) {
  std::vector<FourierSum> out;
  for (Index j = 0; j < u.dim(); ++j) {
    FourierSum dj(u.dim());
    // -πk_j sin(θ) = πk_j cos(θ + π/2)
    for (const auto& t : u.terms())
      if (t.k[j] != 0) dj.add({pi * t.k[j] * t.gamma, t.k, wrap_phase(t.phase + 0.5)});
    out.push_back(std::move(dj));
  }
  return out;
}

FourierSum fourier_form(ProblemKind kind, Index dim) {
  FourierSum u(dim);
  if (kind == ProblemKind::neumann) {
    for (Index i = 0; i < dim; ++i) u.add({1.0, Eigen::VectorXi::Unit(dim, i), 0.0});
    return u;
  }
  if (dim == 1) {
    u.add({1.0, Eigen::VectorXi::Ones(1), 1.5});  // sin(πx) = cos(π(x + 3/2))
  } else if (dim == 2) {
    // sin a sin b = ½cos(a - b) - ½cos(a + b)
    u.add({0.5, Eigen::Vector2i(1, -1), 0.0});
    u.add({0.5, Eigen::Vector2i(1, 1), 1.0});
  } else {
    throw std::invalid_argument("fourier form of the Dirichlet solution is only tabulated for d <= 2");
  }
  return u;
}

Ridge1D cosine_ridge(double amplitude, double freq, double phase) {
  Ridge1D r;
  r.g = [=](double z) { return amplitude * std::cos(pi * (freq * z + phase)); };
  r.dg = [=](double z) { return -amplitude * pi * freq * std::sin(pi * (freq * z + phase)); };
  const double w = pi * std::abs(freq);
  r.bound = std::abs(amplitude) * std::max({1.0, w, w * w, w * w * w});
  return r;
}

// --- one-dimensional ridge networks -----------------------------------------

double RidgeNet1D::value(double z) const {
  double s = c;
  for (Index i = 0; i < size(); ++i) s += a[i] * activation.value(eps[i] * (z - knots[i]));
  return s;
}

double RidgeNet1D::derivative(double z) const {
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) s += a[i] * eps[i] * activation.d1(eps[i] * (z - knots[i]));
  return s;
}

RidgeNet1D relu_interpolant(const Ridge1D& ridge, Index m) {
  if (m < 1) throw std::invalid_argument("relu_interpolant: m must be >= 1");
  if (!(std::abs(ridge.dg(0.0)) < 1e-10)) throw std::invalid_argument("relu_interpolant: g'(0) must vanish");
  const double h = 1.0 / static_cast<double>(m);
  auto z = [&](Index i) { return -1.0 + static_cast<double>(i) * h; };
  auto slope = [&](Index j) { return (ridge.g(z(j + 1)) - ridge.g(z(j))) / h; };

  RidgeNet1D net;
  net.activation = activations::relu;
  net.h = h;
  net.c = ridge.g(0.0);
  net.a.resize(2 * m);
  net.knots.resize(2 * m);
  net.eps.resize(2 * m);
  // left half: ReLU(z_j - z) on knots 1..m, so slopes build up leftwards from 0
  for (Index j = 1; j <= m; ++j) {
    const Index i = j - 1;
    net.knots[i] = z(j);
    net.eps[i] = -1.0;
    net.a[i] = j == m ? -slope(m - 1) : slope(j) - slope(j - 1);
  }
  // right half: ReLU(z - z_j) on knots m..2m-1
  for (Index j = m; j < 2 * m; ++j) {
    const Index i = j;
    net.knots[i] = z(j);
    net.eps[i] = 1.0;
    net.a[i] = j == m ? slope(m) : slope(j) - slope(j - 1);
  }
  return net;
}

RidgeNet1D relu_to_requ(const RidgeNet1D& relu) {
  if (relu.activation.kind != ActivationKind::relu) throw std::invalid_argument("relu_to_requ needs a ReLU net");
  const Index m = relu.size() / 2;
  const double h = relu.h;
  // coefficient of the ReLU neuron on knot j, per side (0 when absent)
  Eigen::VectorXd left = Eigen::VectorXd::Zero(2 * m + 3), right = Eigen::VectorXd::Zero(2 * m + 3);
  auto slot = [](Index j) { return j + 1; };  // shift so j = -1 is addressable
  for (Index i = 0; i < relu.size(); ++i) {
    const Index j = static_cast<Index>(std::lround((relu.knots[i] + 1.0) / h));
    (relu.eps[i] > 0 ? right : left)[slot(j)] += relu.a[i];
  }
  auto coeff = [&](const Eigen::VectorXd& v, Index j) { return (j < -1 || j > 2 * m + 1) ? 0.0 : v[slot(j)]; };

  RidgeNet1D net;
  net.activation = activations::requ;
  net.h = h;
  net.c = relu.c;
  const Index count = 2 * m + 4;
  net.a.resize(count);
  net.knots.resize(count);
  net.eps.resize(count);
  Index at = 0;
  // ReLU(z_j - z) ≈ [ReQU(z_{j+1} - z) - ReQU(z_{j-1} - z)] / 4h
  for (Index q = 0; q <= m + 1; ++q, ++at) {
    net.knots[at] = -1.0 + static_cast<double>(q) * h;
    net.eps[at] = -1.0;
    net.a[at] = (coeff(left, q - 1) - coeff(left, q + 1)) / (4.0 * h);
  }
  // ReLU(z - z_j) ≈ [ReQU(z - z_{j-1}) - ReQU(z - z_{j+1})] / 4h
  for (Index q = m - 1; q <= 2 * m; ++q, ++at) {
    net.knots[at] = -1.0 + static_cast<double>(q) * h;
    net.eps[at] = 1.0;
    net.a[at] = (coeff(right, q + 1) - coeff(right, q - 1)) / (4.0 * h);
  }
  return net;
}

SupErrors sup_errors(const Ridge1D& ridge, const RidgeNet1D& net) {
  std::vector<double> zs;
  constexpr Index grid = 10000;
  zs.reserve(grid + 1 + 3 * static_cast<std::size_t>(net.size()));
  for (Index i = 0; i <= grid; ++i) zs.push_back(-1.0 + 2.0 * static_cast<double>(i) / grid);
  for (Index i = 0; i < net.size(); ++i)
    for (double z : {net.knots[i] - net.h, net.knots[i], net.knots[i] + net.h})
      if (z >= -1.0 && z <= 1.0) zs.push_back(z);
  SupErrors e;
  for (double z : zs) {
    e.value = std::max(e.value, std::abs(ridge.g(z) - net.value(z)));
    e.derivative = std::max(e.derivative, std::abs(ridge.dg(z) - net.derivative(z)));
  }
  return e;
}

std::pair<TwoLayerSpec, ParamVector> ridge_to_two_layer(const RidgeNet1D& net, const Eigen::VectorXd& omega) {
  const Index d = omega.size(), m = net.size();
  TwoLayerSpec spec{d, m, 1, 0.0, net.activation};
  ParamVector p(param_count(spec));
  p[0] = net.c;
  for (Index i = 0; i < m; ++i) {
    p[1 + i] = static_cast<double>(m) * net.a[i];
    p.segment(1 + m + i * d, d) = net.eps[i] * omega;
    p[1 + m + m * d + i] = -net.eps[i] * net.knots[i];
  }
  // smallest B for which the coefficients sit inside the box
  spec.barron_bound = std::max(std::abs(p[0]) / 2.0, p.segment(1, m).cwiseAbs().maxCoeff() / 8.0);
  return {spec, p};
}

// --- assembly ----------------------------------------------------------------

AssembledNetwork assemble_requ_network(const FourierSum& u, Index m_atoms, Index m_grid, std::uint64_t seed) {
  if (u.empty()) throw std::invalid_argument("assemble_requ_network: empty Fourier sum");
  if (m_atoms < 1 || m_grid < 1) throw std::invalid_argument("assemble_requ_network: m_atoms, m_grid >= 1");
  const Index d = u.dim();
  const double B = barron_norm(u, 3.0);

  // u = Σ λ_t g_t(ω_t·x) with λ_t ∝ |γ_t|(1 + π³|k_t|³)
  const auto& terms = u.terms();
  std::vector<double> mass;
  for (const auto& t : terms) {
    if (t.phase != 0.0 && t.phase != 1.0)
      throw std::invalid_argument("assemble_requ_network: atoms need phase 0 or 1 (g'(0) = 0)");
    const double k1 = l1(t.k);
    mass.push_back(std::abs(t.gamma) * (1.0 + pi * pi * pi * k1 * k1 * k1));
  }
  double total_mass = 0.0;
  for (double v : mass) total_mass += v;

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(mass.begin(), mass.end());
  std::vector<Index> counts(terms.size(), 0);
  for (Index s = 0; s < m_atoms; ++s) ++counts[pick(rng)];

  struct Neuron {
    double beta;
    Eigen::VectorXd omega;
    double bias;
  };
  std::vector<Neuron> neurons;
  double c = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (counts[t] == 0) continue;
    const double k1 = l1(terms[t].k);
    const double amp = (terms[t].gamma < 0 ? -1.0 : 1.0) * total_mass / (1.0 + pi * pi * pi * k1 * k1 * k1);
    Ridge1D g = cosine_ridge(amp, k1, terms[t].phase);
    const RidgeNet1D rq = relu_to_requ(relu_interpolant(g, m_grid));
    const Eigen::VectorXd omega = terms[t].k.cast<double>() / k1;
    const double weight = static_cast<double>(counts[t]) / static_cast<double>(m_atoms);
    c += weight * rq.c;
    for (Index q = 0; q < rq.size(); ++q)
      if (rq.a[q] != 0.0) neurons.push_back({weight * rq.a[q], rq.eps[q] * omega, -rq.eps[q] * rq.knots[q]});
  }

  // In c + (1/M)Σ a_i σ(...), a neuron with weight β needs a = Mβ. Split
  // heavy neurons into copies until every |a| ≤ 8B.
  std::vector<Index> copies(neurons.size(), 1);
  Index M = static_cast<Index>(neurons.size());
  for (int round = 0;; ++round) {
    if (round > 10000) throw std::runtime_error("assemble_requ_network: neuron splitting did not settle");
    bool changed = false;
    for (std::size_t j = 0; j < neurons.size(); ++j) {
      const double need = std::ceil(static_cast<double>(M) * std::abs(neurons[j].beta) / (8.0 * B) - 1e-12);
      if (need > static_cast<double>(copies[j])) {
        copies[j] = static_cast<Index>(need);
        changed = true;
      }
    }
    if (!changed) break;
    M = 0;
    for (Index n : copies) M += n;
  }

  AssembledNetwork out;
  out.barron = B;
  out.atoms = m_atoms;
  out.grid = m_grid;
  out.spec = TwoLayerSpec{d, std::max<Index>(M, 1), 1, B, activations::requ};
  out.params = ParamVector::Zero(param_count(out.spec));
  const Index w = out.spec.width;
  out.params[0] = c;
  Index i = 0;
  for (std::size_t j = 0; j < neurons.size(); ++j)
    for (Index r = 0; r < copies[j]; ++r, ++i) {
      out.params[1 + i] = static_cast<double>(M) * neurons[j].beta / static_cast<double>(copies[j]);
      out.params.segment(1 + w + i * d, d) = neurons[j].omega;
      out.params[1 + w + w * d + i] = neurons[j].bias;
    }
  return out;
}

Index box_violations(const TwoLayerSpec& s, const ParamVector& p) {
  constexpr double tol = 1e-12;
  const Index m = s.width, d = s.input_dim, stride = 1 + m * (d + 2);
  const double B = s.barron_bound;
  Index bad = 0;
  for (Index j = 0; j < s.output_dim; ++j) {
    const Index o = j * stride;
    if (std::abs(p[o]) > 2 * B + tol) ++bad;
    for (Index i = 0; i < m; ++i) {
      if (std::abs(p[o + 1 + i]) > 8 * B + tol) ++bad;
      if (p.segment(o + 1 + m + i * d, d).norm() > 1.0 + tol) ++bad;
      if (std::abs(p[o + 1 + m + m * d + i]) > 1.0 + tol) ++bad;
    }
  }
  return bad;
}

double h1_error(const FourierSum& u, const NetworkSpec& spec, const ParamVector& params, Index n_points,
                std::uint64_t seed) {
  const Index d = u.dim();
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd x = sample_interior(n_points, d, rng);
  double acc = 0.0;
  constexpr Index chunk = 4096;
  for (Index s = 0; s < n_points; s += chunk) {
    const Index len = std::min(chunk, n_points - s);
    const Eigen::MatrixXd xs = x.middleCols(s, len);
    const JetBatch j = forward_jets(spec, params, xs, JetOrder::gradient);
    for (Index i = 0; i < len; ++i) {
      const double dv = j.value()(0, i) - u.value(xs.col(i));
      const Eigen::VectorXd gu = u.gradient(xs.col(i));
      double dg = 0.0;
      for (Index k = 0; k < d; ++k) dg += std::pow(j.gradient(k)(0, i) - gu[k], 2);
      acc += dv * dv + dg;
    }
  }
  return std::sqrt(acc / static_cast<double>(n_points));
}

double h1_rate_bound(Index dim, double barron, Index m) {
  const double d = static_cast<double>(dim);
  return (8.0 * d + 32.0 * std::sqrt(d) + 26.0) * barron / std::sqrt(static_cast<double>(m));
}

}  // namespace mixres
