#include "mixres/activation.hpp"

#include <stdexcept>

namespace mixres {

std::string to_string(Activation a) {
  switch (a.kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::requ: return "requ";
    case ActivationKind::recu: return "recu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return activations::relu;
  if (name == "requ") return activations::requ;
  if (name == "recu") return activations::recu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected requ|recu|relu)");
}

}  // namespace mixres
