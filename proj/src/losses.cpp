#include "mixres/losses.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/legendre.hpp>

namespace mixres {

std::string to_string(Method m) {
  switch (m) {
    case Method::mix: return "mix";
    case Method::drm: return "drm";
    case Method::dgm: return "dgm";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "mix") return Method::mix;
  if (name == "drm") return Method::drm;
  if (name == "dgm") return Method::dgm;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected mix|drm|dgm)");
}

NonFiniteError::NonFiniteError(Index sample, bool on_boundary)
    : std::runtime_error(std::string("non-finite residual at ") + (on_boundary ? "boundary" : "interior") +
                         " sample " + std::to_string(sample)),
      sample_(sample),
      on_boundary_(on_boundary) {}

// --- fields ----------------------------------------------------------------

NetworkField::NetworkField(NetworkSpec spec, const ParamVector& params, Index offset)
    : spec_(std::move(spec)), params_(&params), offset_(offset) {}

Index NetworkField::input_dim() const { return mixres::input_dim(spec_); }
Index NetworkField::outputs() const { return output_dim(spec_); }

FieldEval NetworkField::evaluate(const Eigen::MatrixXd& x, JetOrder order, Tape* tape) const {
  if (tape) {
    const Index h = tape->record(spec_, *params_, offset_, x, order);
    return {tape->jets(h), &tape->adjoint(h)};
  }
  return {forward_jets(spec_, params_->segment(offset_, param_count(spec_)), x, order), nullptr};
}

FunctionField::FunctionField(Index input_dim, Index outputs, Fn fn)
    : input_dim_(input_dim), outputs_(outputs), fn_(std::move(fn)) {}

FieldEval FunctionField::evaluate(const Eigen::MatrixXd& x, JetOrder order, Tape*) const {
  return {fn_(x, order), nullptr};
}

FunctionField solution_field(const Problem& problem, double scale) {
  const Index d = problem.dim;
  return FunctionField(d, 1, [problem, scale, d](const Eigen::MatrixXd& x, JetOrder order) {
    JetBatch out(1, x.cols(), d, order);
    for (Index i = 0; i < x.cols(); ++i) {
      const SolutionDerivatives s = problem.solution(x.col(i));
      out.value()(0, i) = scale * s.value;
      if (out.has_gradient())
        for (Index k = 0; k < d; ++k) out.gradient(k)(0, i) = scale * s.gradient[k];
      if (out.has_laplacian()) out.laplacian()(0, i) = scale * s.hessian.trace();
    }
    return out;
  });
}

FunctionField flux_field(const Problem& problem, double scale) {
  const Index d = problem.dim;
  return FunctionField(d, d, [problem, scale, d](const Eigen::MatrixXd& x, JetOrder order) {
    if (order == JetOrder::laplacian)
      throw std::logic_error("flux_field does not provide Laplacians");
    JetBatch out(d, x.cols(), d, order);
    for (Index i = 0; i < x.cols(); ++i) {
      const SolutionDerivatives s = problem.solution(x.col(i));
      out.value().col(i) = scale * s.gradient;
      if (out.has_gradient())
        for (Index k = 0; k < d; ++k) out.gradient(k).col(i) = scale * s.hessian.col(k);
    }
    return out;
  });
}

FunctionField constant_field(Index input_dim, const Eigen::VectorXd& values) {
  return FunctionField(input_dim, values.size(), [values, input_dim](const Eigen::MatrixXd& x, JetOrder order) {
    JetBatch out(values.size(), x.cols(), input_dim, order);
    out.value().colwise() = values;
    return out;
  });
}

// --- losses ----------------------------------------------------------------

namespace {

Eigen::VectorXd weights_or_uniform(const Eigen::VectorXd& w, Index n) {
  if (w.size() == n) return w;
  if (w.size() != 0) throw std::invalid_argument("quadrature weight count does not match batch");
  return Eigen::VectorXd::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

Eigen::VectorXd eval_columns(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.cols());
  for (Index i = 0; i < x.cols(); ++i) out[i] = f(x.col(i));
  return out;
}

void check_field(const Field& f, const Problem& p, Index outputs, const char* what) {
  if (f.input_dim() != p.dim || f.outputs() != outputs)
    throw std::invalid_argument(std::string(what) + " field has the wrong shape for this problem");
}

void require_finite(double r, Index i, bool boundary) {
  if (!std::isfinite(r)) throw NonFiniteError(i, boundary);
}

}  // namespace

LossBreakdown mix_loss(const Field& phi, const Field& psi, const Problem& problem,
                       const SampleBatch& batch, const LossWeights& lw, Tape* tape) {
  const Index d = problem.dim;
  check_field(phi, problem, 1, "phi");
  check_field(psi, problem, d, "psi");
  const bool neumann = problem.kind == ProblemKind::neumann;
  const Index n = batch.interior_size(), nb = batch.boundary_size();
  const Eigen::VectorXd w = weights_or_uniform(batch.interior_weights, n);
  const Eigen::VectorXd v = weights_or_uniform(batch.boundary_weights, nb);
  const Eigen::VectorXd f = eval_columns(problem.source, batch.interior);
  const Eigen::VectorXd g = eval_columns(problem.boundary, batch.boundary);

  LossBreakdown L;
  FieldEval pi = phi.evaluate(batch.interior, JetOrder::gradient, tape);
  FieldEval si = psi.evaluate(batch.interior, JetOrder::gradient, tape);
  for (Index i = 0; i < n; ++i) {
    double gap2 = 0.0, div = 0.0;
    for (Index k = 0; k < d; ++k) {
      const double gap = pi.jets.gradient(k)(0, i) - si.jets.value()(k, i);
      gap2 += gap * gap;
      div += si.jets.gradient(k)(k, i);
    }
    double res = -div - f[i];
    if (neumann) res += pi.jets.value()(0, i);
    require_finite(gap2 + res, i, false);
    L.r_g += w[i] * gap2;
    L.r_e += w[i] * res * res;

    const double a_res = 2.0 * lw.lambda1 * w[i] * res;
    for (Index k = 0; k < d; ++k) {
      const double a_gap = 2.0 * w[i] * (pi.jets.gradient(k)(0, i) - si.jets.value()(k, i));
      if (pi.adjoint) pi.adjoint->gradient(k)(0, i) += a_gap;
      if (si.adjoint) {
        si.adjoint->value()(k, i) -= a_gap;
        si.adjoint->gradient(k)(k, i) -= a_res;
      }
    }
    if (neumann && pi.adjoint) pi.adjoint->value()(0, i) += a_res;
  }

  if (neumann) {
    FieldEval sb = psi.evaluate(batch.boundary, JetOrder::value, tape);
    for (Index i = 0; i < nb; ++i) {
      const double res = sb.jets.value().col(i).dot(batch.normals.col(i)) - g[i];
      require_finite(res, i, true);
      L.r_b += v[i] * res * res;
      if (sb.adjoint) sb.adjoint->value().col(i) += 2.0 * lw.lambda2 * v[i] * res * batch.normals.col(i);
    }
  } else {
    FieldEval pb = phi.evaluate(batch.boundary, JetOrder::value, tape);
    for (Index i = 0; i < nb; ++i) {
      const double res = pb.jets.value()(0, i) - g[i];
      require_finite(res, i, true);
      L.r_b += v[i] * res * res;
      if (pb.adjoint) pb.adjoint->value()(0, i) += 2.0 * lw.lambda2 * v[i] * res;
    }
  }
  L.total = L.r_g + lw.lambda1 * L.r_e + lw.lambda2 * L.r_b;
  return L;
}

LossBreakdown drm_loss(const Field& phi, const Problem& problem, const SampleBatch& batch,
                       const LossWeights& lw, Tape* tape) {
  const Index d = problem.dim;
  check_field(phi, problem, 1, "phi");
  const bool neumann = problem.kind == ProblemKind::neumann;
  const Index n = batch.interior_size(), nb = batch.boundary_size();
  const Eigen::VectorXd w = weights_or_uniform(batch.interior_weights, n);
  const Eigen::VectorXd v = weights_or_uniform(batch.boundary_weights, nb);
  const Eigen::VectorXd f = eval_columns(problem.source, batch.interior);
  const Eigen::VectorXd g = eval_columns(problem.boundary, batch.boundary);

  LossBreakdown L;
  FieldEval pi = phi.evaluate(batch.interior, JetOrder::gradient, tape);
  for (Index i = 0; i < n; ++i) {
    const double u = pi.jets.value()(0, i);
    double grad2 = 0.0;
    for (Index k = 0; k < d; ++k) grad2 += pi.jets.gradient(k)(0, i) * pi.jets.gradient(k)(0, i);
    double energy = 0.5 * grad2 - f[i] * u;
    if (neumann) energy += 0.5 * u * u;
    require_finite(energy, i, false);
    L.r_e += w[i] * energy;
    if (pi.adjoint) {
      for (Index k = 0; k < d; ++k) pi.adjoint->gradient(k)(0, i) += w[i] * pi.jets.gradient(k)(0, i);
      pi.adjoint->value()(0, i) += w[i] * ((neumann ? u : 0.0) - f[i]);
    }
  }

  FieldEval pb = phi.evaluate(batch.boundary, JetOrder::value, tape);
  // boundary averages are over ∂Ω, whose measure is 2d
  const double surface = 2.0 * static_cast<double>(d);
  for (Index i = 0; i < nb; ++i) {
    const double u = pb.jets.value()(0, i);
    if (neumann) {
      // natural boundary condition: linear term -∫ g u ds
      require_finite(u, i, true);
      L.r_b -= surface * v[i] * g[i] * u;
      if (pb.adjoint) pb.adjoint->value()(0, i) -= surface * v[i] * g[i];
    } else {
      const double res = u - g[i];
      require_finite(res, i, true);
      L.r_b += v[i] * res * res;
      if (pb.adjoint) pb.adjoint->value()(0, i) += 2.0 * lw.lambda_b * v[i] * res;
    }
  }
  L.total = L.r_e + (neumann ? 1.0 : lw.lambda_b) * L.r_b;
  return L;
}

LossBreakdown dgm_loss(const Field& phi, const Problem& problem, const SampleBatch& batch,
                       const LossWeights& lw, Tape* tape) {
  const Index d = problem.dim;
  check_field(phi, problem, 1, "phi");
  const bool neumann = problem.kind == ProblemKind::neumann;
  const Index n = batch.interior_size(), nb = batch.boundary_size();
  const Eigen::VectorXd w = weights_or_uniform(batch.interior_weights, n);
  const Eigen::VectorXd v = weights_or_uniform(batch.boundary_weights, nb);
  const Eigen::VectorXd f = eval_columns(problem.source, batch.interior);
  const Eigen::VectorXd g = eval_columns(problem.boundary, batch.boundary);

  LossBreakdown L;
  FieldEval pi = phi.evaluate(batch.interior, JetOrder::laplacian, tape);
  for (Index i = 0; i < n; ++i) {
    const double lap = pi.jets.laplacian()(0, i);
    const double res = neumann ? -lap + pi.jets.value()(0, i) - f[i] : lap + f[i];
    require_finite(res, i, false);
    L.r_e += w[i] * res * res;
    if (pi.adjoint) {
      const double a = 2.0 * w[i] * res;
      if (neumann) {
        pi.adjoint->laplacian()(0, i) -= a;
        pi.adjoint->value()(0, i) += a;
      } else {
        pi.adjoint->laplacian()(0, i) += a;
      }
    }
  }

  FieldEval pb = phi.evaluate(batch.boundary, neumann ? JetOrder::gradient : JetOrder::value, tape);
  for (Index i = 0; i < nb; ++i) {
    double res = -g[i];
    if (neumann)
      for (Index k = 0; k < d; ++k) res += pb.jets.gradient(k)(0, i) * batch.normals(k, i);
    else
      res += pb.jets.value()(0, i);
    require_finite(res, i, true);
    L.r_b += v[i] * res * res;
    if (pb.adjoint) {
      const double a = 2.0 * lw.lambda_b * v[i] * res;
      if (neumann)
        for (Index k = 0; k < d; ++k) pb.adjoint->gradient(k)(0, i) += a * batch.normals(k, i);
      else
        pb.adjoint->value()(0, i) += a;
    }
  }
  L.total = L.r_e + lw.lambda_b * L.r_b;
  return L;
}

LossBreakdown method_loss(Method method, const Field& phi, const Field* psi, const Problem& problem,
                          const SampleBatch& batch, const LossWeights& weights, Tape* tape) {
  switch (method) {
    case Method::mix:
      if (!psi) throw std::invalid_argument("mix loss needs a flux field");
      return mix_loss(phi, *psi, problem, batch, weights, tape);
    case Method::drm: return drm_loss(phi, problem, batch, weights, tape);
    case Method::dgm: return dgm_loss(phi, problem, batch, weights, tape);
  }
  throw std::invalid_argument("unknown method");
}

LossBreakdown method_loss_chunked(Method method, const Field& phi, const Field* psi,
                                  const Problem& problem, const SampleBatch& batch,
                                  const LossWeights& weights, Index chunk) {
  const Index n = batch.interior_size(), nb = batch.boundary_size();
  const Eigen::VectorXd w = weights_or_uniform(batch.interior_weights, n);
  const Eigen::VectorXd v = weights_or_uniform(batch.boundary_weights, nb);
  const Index chunks = std::max<Index>(1, std::max((n + chunk - 1) / chunk, (nb + chunk - 1) / chunk));
  LossBreakdown total;
  for (Index c = 0; c < chunks; ++c) {
    const Index i0 = std::min(n, c * chunk), i1 = std::min(n, i0 + chunk);
    const Index b0 = std::min(nb, c * chunk), b1 = std::min(nb, b0 + chunk);
    SampleBatch part;
    part.interior = batch.interior.middleCols(i0, i1 - i0);
    part.interior_weights = w.segment(i0, i1 - i0);
    part.boundary = batch.boundary.middleCols(b0, b1 - b0);
    part.normals = batch.normals.middleCols(b0, b1 - b0);
    part.boundary_weights = v.segment(b0, b1 - b0);
    total += method_loss(method, phi, psi, problem, part, weights, nullptr);
  }
  return total;
}

// --- error metrics ---------------------------------------------------------

RelativeErrors relative_errors(const Field& phi, const Field* psi, const Problem& problem,
                               const Eigen::MatrixXd& points) {
  const Index d = problem.dim;
  check_field(phi, problem, 1, "phi");
  if (psi) check_field(*psi, problem, d, "psi");
  constexpr Index chunk = 2000;
  double num0 = 0, den0 = 0, num1 = 0, den1 = 0, num2 = 0, den2 = 0;
  for (Index start = 0; start < points.cols(); start += chunk) {
    const Index len = std::min(chunk, points.cols() - start);
    const Eigen::MatrixXd x = points.middleCols(start, len);
    const JetBatch pj = phi.evaluate(x, psi ? JetOrder::value : JetOrder::laplacian, nullptr).jets;
    JetBatch sj;
    if (psi) sj = psi->evaluate(x, JetOrder::gradient, nullptr).jets;
    for (Index i = 0; i < len; ++i) {
      const SolutionDerivatives s = problem.solution(x.col(i));
      const double lap = s.hessian.trace();
      const double e0 = pj.value()(0, i) - s.value;
      double e1 = 0.0, approx_lap = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double gk = psi ? sj.value()(k, i) : pj.gradient(k)(0, i);
        e1 += (gk - s.gradient[k]) * (gk - s.gradient[k]);
        approx_lap += psi ? sj.gradient(k)(k, i) : 0.0;
      }
      if (!psi) approx_lap = pj.laplacian()(0, i);
      num0 += e0 * e0;
      den0 += s.value * s.value;
      num1 += e1;
      den1 += s.gradient.squaredNorm();
      num2 += (approx_lap - lap) * (approx_lap - lap);
      den2 += lap * lap;
    }
  }
  if (den0 == 0.0 || den1 == 0.0 || den2 == 0.0)
    throw std::domain_error("relative error with zero reference norm");
  return {std::sqrt(num0 / den0), std::sqrt(num1 / den1), std::sqrt(num2 / den2)};
}

RelativeErrors relative_errors(const Field& phi, const Field* psi, const Problem& problem,
                               Index n_quad, std::mt19937_64& rng) {
  if (n_quad < 1) throw std::invalid_argument("n_quad must be positive");
  return relative_errors(phi, psi, problem, sample_interior(n_quad, problem.dim, rng));
}

// --- reference quadrature --------------------------------------------------

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_01(Index order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(order));
  Eigen::VectorXd nodes(order), weights(order);
  Index at = 0;
  auto push = [&](double x) {
    const double dp = boost::math::legendre_p_prime(static_cast<int>(order), x);
    nodes[at] = 0.5 * (x + 1.0);
    weights[at] = 1.0 / ((1.0 - x * x) * dp * dp);  // half of 2/((1-x²)P'²)
    ++at;
  };
  // zeros are non-negative and ascending; mirror for the negative half
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
    if (*it != 0.0) push(-*it);
  for (double z : zeros) push(z);
  return {nodes, weights};
}

namespace {

// Tensor grid of `dims` copies of the 1D rule; returns points (dims × N) and weights.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> tensor_rule(const Eigen::VectorXd& nodes,
                                                        const Eigen::VectorXd& weights, Index dims) {
  const Index q = nodes.size();
  Index total = 1;
  for (Index k = 0; k < dims; ++k) total *= q;
  Eigen::MatrixXd pts(dims, total);
  Eigen::VectorXd w(total);
  for (Index idx = 0; idx < total; ++idx) {
    Index rem = idx;
    double wt = 1.0;
    for (Index k = 0; k < dims; ++k) {
      const Index j = rem % q;
      rem /= q;
      pts(k, idx) = nodes[j];
      wt *= weights[j];
    }
    w[idx] = wt;
  }
  return {pts, w};
}

}  // namespace

SampleBatch gauss_legendre_batch(Index dim, Index order) {
  const auto [nodes, weights] = gauss_legendre_01(order);
  SampleBatch b;
  std::tie(b.interior, b.interior_weights) = tensor_rule(nodes, weights, dim);
  const auto [face_pts, face_w] = tensor_rule(nodes, weights, dim - 1);
  const Index per_face = face_w.size();
  b.boundary.resize(dim, 2 * dim * per_face);
  b.normals = Eigen::MatrixXd::Zero(dim, 2 * dim * per_face);
  b.boundary_weights.resize(2 * dim * per_face);
  Index at = 0;
  for (Index axis = 0; axis < dim; ++axis)
    for (int side = 0; side < 2; ++side)
      for (Index i = 0; i < per_face; ++i, ++at) {
        Index r = 0;
        for (Index k = 0; k < dim; ++k) b.boundary(k, at) = (k == axis) ? double(side) : face_pts(r++, i);
        b.normals(axis, at) = side ? 1.0 : -1.0;
        b.boundary_weights[at] = face_w[i] / static_cast<double>(2 * dim);
      }
  return b;
}

SampleBatch monte_carlo_batch(Index n, Index nbar, Index dim, std::uint64_t seed) {
  SampleBatch b = sample_batch(n, nbar, dim, seed);
  b.interior_weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  b.boundary_weights = Eigen::VectorXd::Constant(nbar, 1.0 / static_cast<double>(nbar));
  return b;
}

}  // namespace mixres
