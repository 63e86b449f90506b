#include "mixres/jet.hpp"

#include <stdexcept>

namespace mixres {

Jetd JetBatch::jet(Index row, Index i) const {
  Jetd j(dim_);
  j.value = value()(row, i);
  if (has_gradient())
    for (Index k = 0; k < dim_; ++k) j.gradient[k] = gradient(k)(row, i);
  if (has_laplacian()) j.laplacian = laplacian()(row, i);
  return j;
}

VectorJetd JetBatch::vector_jet(Index i) const {
  if (outputs() != dim_ || !has_gradient())
    throw std::logic_error("vector_jet needs a d-valued field with gradients");
  VectorJetd v;
  v.values = value().col(i);
  v.jacobian.resize(dim_, dim_);
  for (Index k = 0; k < dim_; ++k) v.jacobian.col(k) = gradient(k).col(i);
  v.divergence = v.jacobian.trace();
  return v;
}

}  // namespace mixres
