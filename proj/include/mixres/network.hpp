#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "mixres/activation.hpp"

namespace mixres {

using Eigen::Index;

/// Flat parameter storage. The layout is fixed per architecture; see
/// ResNetSpec and TwoLayerSpec.
using ParamVector = Eigen::VectorXd;

template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Residual network
///   h_1 = A x,
///   h_{j+1} = σ(W_j h_j + b_j) + h_j,   j = 1..blocks,
///   y = C h_{blocks+1}.
/// Parameter layout: A (width×input_dim, row-major), then for every block
/// W_j (width×width, row-major) followed by b_j, then C (output_dim×width,
/// row-major).
struct ResNetSpec {
  Index input_dim = 2;
  Index width = 10;
  Index blocks = 10;
  Index output_dim = 1;
  Activation activation = activations::requ;

  friend bool operator==(const ResNetSpec&, const ResNetSpec&) = default;
};

/// Two-layer class c + (1/m) Σ_i a_i σ(ω_i·x + b_i) with box constraints
/// |c| ≤ 2B, |a_i| ≤ 8B, |ω_i|_2 ≤ 1, |b_i| ≤ 1, where B = barron_bound.
/// A vector-valued net (output_dim > 1) is output_dim independent copies.
/// Parameter layout per output: c, a (width), ω (width×input_dim,
/// row-major), b (width).
struct TwoLayerSpec {
  Index input_dim = 2;
  Index width = 10;
  Index output_dim = 1;
  double barron_bound = 1.0;
  Activation activation = activations::requ;

  friend bool operator==(const TwoLayerSpec&, const TwoLayerSpec&) = default;
};

using NetworkSpec = std::variant<ResNetSpec, TwoLayerSpec>;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Index param_count(const ResNetSpec& spec);
Index param_count(const TwoLayerSpec& spec);
Index param_count(const NetworkSpec& spec);

Index input_dim(const NetworkSpec& spec);
Index output_dim(const NetworkSpec& spec);
Activation activation(const NetworkSpec& spec);

/// Throws NetworkError for non-positive sizes.
void validate(const NetworkSpec& spec);

/// Glorot-uniform weights, zero biases. For the two-layer class the
/// result is additionally projected into its box.
ParamVector init_params(const NetworkSpec& spec, std::mt19937_64& rng);
ParamVector init_resnet(const ResNetSpec& spec, std::mt19937_64& rng, double block_gain = 1.0);

/// Euclidean projection onto the two-layer box constraints.
ParamVector project_two_layer(const ParamVector& params, const TwoLayerSpec& spec);

/// Smallest ResNet width whose parameter count is at least `target`.
Index width_for_param_count(Index target, Index input_dim, Index blocks, Index output_dim);

// ---------------------------------------------------------------------------
// Value-only forward evaluation, templated on the scalar type. This is the
// plain definition of each network; jets and parameter gradients live in
// autodiff.hpp and are checked against finite differences of this path.

namespace detail {

template <typename Scalar, typename Params>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_resnet(
    const ResNetSpec& s, const Params& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = RowMajorMatrix<Scalar>;
  const Index w = s.width;
  Index at = 0;
  auto take_matrix = [&](Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index i = 0; i < rows * cols; ++i) m.data()[i] = Scalar(p[at + i]);
    at += rows * cols;
    return m;
  };
  auto take_vector = [&](Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = Scalar(p[at + i]);
    at += n;
    return v;
  };
  Vec h = take_matrix(w, s.input_dim) * x;
  for (Index j = 0; j < s.blocks; ++j) {
    const Mat W = take_matrix(w, w);
    const Vec b = take_vector(w);
    Vec z = W * h + b;
    for (Index i = 0; i < w; ++i) h[i] += s.activation.value(z[i]);
  }
  return take_matrix(s.output_dim, w) * h;
}

template <typename Scalar, typename Params>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_two_layer(
    const TwoLayerSpec& s, const Params& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(s.output_dim);
  const Index m = s.width, d = s.input_dim;
  const Index stride = 1 + m * (d + 2);
  for (Index j = 0; j < s.output_dim; ++j) {
    const Index o = j * stride;
    Scalar acc(0);
    for (Index i = 0; i < m; ++i) {
      Scalar z = Scalar(p[o + 1 + m + m * d + i]);
      for (Index k = 0; k < d; ++k) z += Scalar(p[o + 1 + m + i * d + k]) * x[k];
      acc += Scalar(p[o + 1 + i]) * s.activation.value(z);
    }
    y[j] = Scalar(p[o]) + acc / Scalar(m);
  }
  return y;
}

}  // namespace detail

/// y = net(x). `params` may be any indexable container of doubles.
template <typename Scalar, typename Params>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate(
    const NetworkSpec& spec, const Params& params, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  return std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ResNetSpec>)
          return detail::evaluate_resnet<Scalar>(s, params, x);
        else
          return detail::evaluate_two_layer<Scalar>(s, params, x);
      },
      spec);
}

std::string describe(const NetworkSpec& spec);

}  // namespace mixres
