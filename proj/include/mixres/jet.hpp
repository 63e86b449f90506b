#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace mixres {

using Eigen::Index;

/// How much of a field's local Taylor data to propagate.
enum class JetOrder { value = 0, gradient = 1, laplacian = 2 };

/// (value, spatial gradient, Laplacian) of a scalar field at one point.
template <typename Scalar>
struct Jet {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar value{0};
  Vector gradient;
  Scalar laplacian{0};

  Jet() = default;
  explicit Jet(Index dim) : gradient(Vector::Zero(dim)) {}

  Index dim() const { return gradient.size(); }
  bool all_finite() const {
    return std::isfinite(static_cast<double>(value)) && gradient.allFinite() &&
           std::isfinite(static_cast<double>(laplacian));
  }

  Jet& operator+=(const Jet& o) {
    value += o.value;
    gradient += o.gradient;
    laplacian += o.laplacian;
    return *this;
  }
  Jet& operator*=(Scalar a) {
    value *= a;
    gradient *= a;
    laplacian *= a;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator*(Scalar a, Jet j) { return j *= a; }
};

/// Vector field ψ: R^d -> R^d at one point. jacobian(j, k) = ∂ψ_j/∂x_k.
template <typename Scalar>
struct VectorJet {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector values;
  Matrix jacobian;
  Scalar divergence{0};
};

using Jetd = Jet<double>;
using VectorJetd = VectorJet<double>;

/// Jets of an `outputs`-valued field at `points` sample locations, stored as
/// one matrix of column blocks [value | ∂_1 | ... | ∂_d | Δ]. Each block is
/// outputs × points. Blocks beyond `order` are absent.
class JetBatch {
 public:
  JetBatch() = default;
  JetBatch(Index outputs, Index points, Index dim, JetOrder order)
      : points_(points), dim_(dim), order_(order),
        data_(Eigen::MatrixXd::Zero(outputs, points * block_count(dim, order))) {}

  static Index block_count(Index dim, JetOrder order) {
    switch (order) {
      case JetOrder::value: return 1;
      case JetOrder::gradient: return 1 + dim;
      case JetOrder::laplacian: return 2 + dim;
    }
    return 1;
  }

  Index outputs() const { return data_.rows(); }
  Index points() const { return points_; }
  Index dim() const { return dim_; }
  JetOrder order() const { return order_; }
  bool has_gradient() const { return order_ != JetOrder::value; }
  bool has_laplacian() const { return order_ == JetOrder::laplacian; }

  auto value() { return data_.leftCols(points_); }
  auto value() const { return data_.leftCols(points_); }
  auto gradient(Index k) { return data_.middleCols((1 + k) * points_, points_); }
  auto gradient(Index k) const { return data_.middleCols((1 + k) * points_, points_); }
  auto laplacian() { return data_.middleCols((1 + dim_) * points_, points_); }
  auto laplacian() const { return data_.middleCols((1 + dim_) * points_, points_); }

  Eigen::MatrixXd& data() { return data_; }
  const Eigen::MatrixXd& data() const { return data_; }

  /// Scalar jet of output `row` at sample `i`. Missing orders read as 0.
  Jetd jet(Index row, Index i) const;
  /// Vector jet at sample `i`; requires outputs() == dim() and a gradient block.
  VectorJetd vector_jet(Index i) const;

 private:
  Index points_ = 0;
  Index dim_ = 0;
  JetOrder order_ = JetOrder::value;
  Eigen::MatrixXd data_;
};

}  // namespace mixres
