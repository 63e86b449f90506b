#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mixres/autodiff.hpp"
#include "mixres/jet.hpp"
#include "mixres/network.hpp"
#include "mixres/problem.hpp"

namespace mixres {

enum class Method { mix, drm, dgm };

std::string to_string(Method m);
Method parse_method(std::string_view name);

/// Mix: total = r_g + λ1 r_e + λ2 r_b. DRM/DGM: total = r_e + λ_b r_b.
struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda_b = 1.0;
};

/// Weighted residual terms over one batch. For DRM r_e is the Ritz energy
/// and may be negative.
struct LossBreakdown {
  double r_g = 0.0;
  double r_e = 0.0;
  double r_b = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o) {
    r_g += o.r_g;
    r_e += o.r_e;
    r_b += o.r_b;
    total += o.total;
    return *this;
  }
};

/// Raised when a residual is NaN/Inf. `sample` indexes the interior batch
/// (or the boundary batch when `on_boundary`).
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(Index sample, bool on_boundary);
  Index sample() const { return sample_; }
  bool on_boundary() const { return on_boundary_; }

 private:
  Index sample_;
  bool on_boundary_;
};

/// Jets of a field plus, when the evaluation was recorded on a tape, the
/// slot that receives ∂loss/∂jets.
struct FieldEval {
  JetBatch jets;
  JetBatch* adjoint = nullptr;
};

/// Anything that can produce jets at a set of points: networks, the
/// analytic solution and its gradient, test fixtures.
class Field {
 public:
  virtual ~Field() = default;
  virtual Index input_dim() const = 0;
  virtual Index outputs() const = 0;
  virtual FieldEval evaluate(const Eigen::MatrixXd& x, JetOrder order, Tape* tape) const = 0;
};

/// Network whose parameters are params[offset, offset + param_count(spec)).
class NetworkField final : public Field {
 public:
  NetworkField(NetworkSpec spec, const ParamVector& params, Index offset = 0);
  Index input_dim() const override;
  Index outputs() const override;
  FieldEval evaluate(const Eigen::MatrixXd& x, JetOrder order, Tape* tape) const override;

 private:
  NetworkSpec spec_;
  const ParamVector* params_;
  Index offset_;
};

/// Field defined by a callable producing jets directly (never taped).
class FunctionField final : public Field {
 public:
  using Fn = std::function<JetBatch(const Eigen::MatrixXd&, JetOrder)>;
  FunctionField(Index input_dim, Index outputs, Fn fn);
  Index input_dim() const override { return input_dim_; }
  Index outputs() const override { return outputs_; }
  FieldEval evaluate(const Eigen::MatrixXd& x, JetOrder order, Tape* tape) const override;

 private:
  Index input_dim_;
  Index outputs_;
  Fn fn_;
};

/// scale · u*.
FunctionField solution_field(const Problem& problem, double scale = 1.0);
/// scale · ∇u*. Its jets carry the Hessian; a Laplacian block is not available.
FunctionField flux_field(const Problem& problem, double scale = 1.0);
/// Constant field with the given output values.
FunctionField constant_field(Index input_dim, const Eigen::VectorXd& values);

LossBreakdown mix_loss(const Field& phi, const Field& psi, const Problem& problem,
                       const SampleBatch& batch, const LossWeights& weights, Tape* tape = nullptr);
LossBreakdown drm_loss(const Field& phi, const Problem& problem, const SampleBatch& batch,
                       const LossWeights& weights, Tape* tape = nullptr);
LossBreakdown dgm_loss(const Field& phi, const Problem& problem, const SampleBatch& batch,
                       const LossWeights& weights, Tape* tape = nullptr);

/// Dispatches on `method`; `psi` is required for Mix and ignored otherwise.
LossBreakdown method_loss(Method method, const Field& phi, const Field* psi, const Problem& problem,
                          const SampleBatch& batch, const LossWeights& weights, Tape* tape = nullptr);

/// Same as method_loss for batches with explicit weights, evaluated in
/// chunks of at most `chunk` points (terms are linear in the weights).
LossBreakdown method_loss_chunked(Method method, const Field& phi, const Field* psi,
                                  const Problem& problem, const SampleBatch& batch,
                                  const LossWeights& weights, Index chunk = 4096);

struct RelativeErrors {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
};

/// Monte-Carlo relative L² errors of u, ∇u and Δu at the columns of
/// `points`. With a flux field, ∇φ and Δφ are replaced by ψ and div ψ.
RelativeErrors relative_errors(const Field& phi, const Field* psi, const Problem& problem,
                               const Eigen::MatrixXd& points);
/// Same, at n_quad uniform points drawn from `rng`.
RelativeErrors relative_errors(const Field& phi, const Field* psi, const Problem& problem,
                               Index n_quad, std::mt19937_64& rng);

/// Tensor Gauss–Legendre rule on [0,1]^d (order points per axis) with the
/// matching (d-1)-dimensional rules on the 2d faces. Weights sum to one on
/// the interior and on the boundary, matching uniform sampling.
SampleBatch gauss_legendre_batch(Index dim, Index order);
/// Plain Monte-Carlo reference batch with explicit uniform weights.
SampleBatch monte_carlo_batch(Index n, Index nbar, Index dim, std::uint64_t seed);

/// Nodes and weights of the order-n Gauss–Legendre rule on [0,1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_01(Index order);

}  // namespace mixres
