#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mixres {

/// Rectified power units (max{z,0})^p. ReLU is only used by the
/// constructive approximation code; networks are trained with ReQU/ReCU.
enum class ActivationKind { relu, requ, recu };

struct Activation {
  ActivationKind kind = ActivationKind::requ;

  constexpr int power() const {
    switch (kind) {
      case ActivationKind::relu: return 1;
      case ActivationKind::requ: return 2;
      case ActivationKind::recu: return 3;
    }
    return 2;
  }

  // The derivatives below use the strict test z > 0, so every derivative is
  // 0 at exactly z = 0 (e.g. ReQU''(0) = 0 although ReQU''(0+) = 2).

  template <typename Scalar>
  Scalar value(Scalar z) const {
    if (!(z > Scalar(0))) return Scalar(0);
    switch (kind) {
      case ActivationKind::relu: return z;
      case ActivationKind::requ: return z * z;
      case ActivationKind::recu: return z * z * z;
    }
    return Scalar(0);
  }

  template <typename Scalar>
  Scalar d1(Scalar z) const {
    if (!(z > Scalar(0))) return Scalar(0);
    switch (kind) {
      case ActivationKind::relu: return Scalar(1);
      case ActivationKind::requ: return Scalar(2) * z;
      case ActivationKind::recu: return Scalar(3) * z * z;
    }
    return Scalar(0);
  }

  template <typename Scalar>
  Scalar d2(Scalar z) const {
    if (!(z > Scalar(0))) return Scalar(0);
    switch (kind) {
      case ActivationKind::relu: return Scalar(0);
      case ActivationKind::requ: return Scalar(2);
      case ActivationKind::recu: return Scalar(6) * z;
    }
    return Scalar(0);
  }

  template <typename Scalar>
  Scalar d3(Scalar z) const {
    if (!(z > Scalar(0))) return Scalar(0);
    return kind == ActivationKind::recu ? Scalar(6) : Scalar(0);
  }

  friend constexpr bool operator==(Activation, Activation) = default;
};

namespace activations {
inline constexpr Activation relu{ActivationKind::relu};
inline constexpr Activation requ{ActivationKind::requ};
inline constexpr Activation recu{ActivationKind::recu};
}  // namespace activations

/// Elementwise σ^{(order)}(z), order 0..3, with the same kink convention as
/// the scalar members.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> activate(
    Activation a, int order, const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const auto zp = z.max(Scalar(0));
  const auto on = (z > Scalar(0)).template cast<Scalar>();
  const int p = a.power();
  if (order > p) return Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(z.rows(), z.cols());
  switch (p * 4 + order) {
    case 4: return zp;                      // relu
    case 5: return on;
    case 8: return zp.square();             // requ
    case 9: return Scalar(2) * zp;
    case 10: return Scalar(2) * on;
    case 12: return zp.cube();              // recu
    case 13: return Scalar(3) * zp.square();
    case 14: return Scalar(6) * zp;
    case 15: return Scalar(6) * on;
    default: break;
  }
  return Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(z.rows(), z.cols());
}

std::string to_string(Activation a);
/// Accepts "relu", "requ", "recu" (case-sensitive). Throws std::invalid_argument.
Activation parse_activation(std::string_view name);

}  // namespace mixres
