#include "chainsurv/io/modality.hpp"

#include "chainsurv/core/errors.hpp"

namespace chainsurv::io {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::gene:
      return "gene";
    case Modality::meth:
      return "meth";
    case Modality::path_local:
      return "path_local";
    case Modality::path_global:
      return "path_global";
  }
  return "unknown";
}

Modality modality_from_string(std::string_view name) {
  for (Modality m : kCanonicalOrder) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown modality '" + std::string(name) + "'");
}

}  // namespace chainsurv::io

namespace chainsurv::io {

core::Tensor as_tensor(const ModalityChain& chain) {
  return core::Tensor::from({chain.n_tokens, chain.dim}, chain.values);
}

}  // namespace chainsurv::io
