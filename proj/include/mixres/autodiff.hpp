#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mixres/jet.hpp"
#include "mixres/network.hpp"

namespace mixres {

/// Jets of `spec` at the columns of `x` (input_dim × n). Nothing is
/// retained for a reverse pass.
JetBatch forward_jets(const NetworkSpec& spec, const Eigen::Ref<const ParamVector>& params,
                      const Eigen::MatrixXd& x, JetOrder order);

/// Exact value, gradient and Laplacian of a scalar network at one point.
/// Throws NetworkError on dimension mismatch or non-finite parameters.
Jetd eval_jet(const NetworkSpec& spec, const ParamVector& params, const Eigen::VectorXd& x);

/// Values, Jacobian and divergence of a network R^d -> R^d at one point.
VectorJetd eval_vector_jet(const NetworkSpec& spec, const ParamVector& params,
                           const Eigen::VectorXd& x);

/// Record of forward jet passes over slices of one flat parameter vector.
/// After recording, callers write ∂loss/∂jets into adjoint(h); backward()
/// then returns ∂loss/∂params. backward() does not modify the tape, so it
/// can be replayed.
class Tape {
 public:
  explicit Tape(Index param_size);
  ~Tape();
  Tape(Tape&&) noexcept;
  Tape& operator=(Tape&&) noexcept;

  /// Evaluates the network whose parameters occupy
  /// params[offset, offset + param_count(spec)) and returns a handle.
  Index record(const NetworkSpec& spec, const ParamVector& params, Index offset,
               const Eigen::MatrixXd& x, JetOrder order);

  const JetBatch& jets(Index handle) const;
  JetBatch& adjoint(Index handle);
  const JetBatch& adjoint(Index handle) const;

  ParamVector backward() const;

  Index param_size() const { return param_size_; }
  Index entries() const { return static_cast<Index>(entries_.size()); }

 private:
  struct Entry;
  Index param_size_;
  std::vector<std::unique_ptr<Entry>> entries_;
};

struct LossAndGradient {
  double value = 0.0;
  ParamVector gradient;
};

/// Reverse-mode gradient of a scalar loss assembled from recorded jets.
/// `loss_eval` records the evaluations it needs on the tape, fills their
/// adjoints and returns the loss value.
LossAndGradient loss_gradient(const ParamVector& params,
                              const std::function<double(Tape&)>& loss_eval);

}  // namespace mixres
