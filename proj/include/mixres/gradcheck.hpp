#pragma once

#include <cstdint>

#include "mixres/network.hpp"

namespace mixres {

/// Largest blockwise relative errors between analytic derivatives and
/// central finite differences: ‖analytic - fd‖∞ / ‖fd‖∞ per block. FD
/// entries inside their own rounding band are read as 0, and an all-zero FD
/// block reports the absolute error instead.
struct GradcheckReport {
  double value = 0.0;
  double gradient = 0.0;
  double laplacian = 0.0;
  double params = 0.0;
  Index points = 0;
  Index resampled = 0;  // points redrawn because they sat on an activation kink
  bool finite = true;   // false when the network overflows at the check points; errors are then inf

  double max_jet() const;
};

/// Jets at `points` random inputs are compared with long-double finite
/// differences of the value-only forward pass; the parameter gradient of a
/// quadratic functional of all jets is compared with double-precision
/// central differences. Laplacians are skipped for ReLU.
GradcheckReport gradcheck(const NetworkSpec& spec, const ParamVector& params, Index points,
                          std::uint64_t seed);

}  // namespace mixres
