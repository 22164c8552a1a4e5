#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainsurv::io {

enum class Modality : std::size_t { gene = 0, meth = 1, path_local = 2, path_global = 3 };

inline constexpr std::size_t kModalityCount = 4;

// Interleaving and MI pair order.
inline constexpr std::array<Modality, kModalityCount> kCanonicalOrder = {
    Modality::gene, Modality::meth, Modality::path_local, Modality::path_global};

constexpr std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }

std::string_view to_string(Modality m);
// Throws ValidationError for unknown names.
Modality modality_from_string(std::string_view name);

// Ordered token list for one modality, row-major n_tokens x dim.
struct ModalityChain {
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> token(std::size_t i) const { return {values.data() + i * dim, dim}; }
  bool empty() const { return n_tokens == 0; }
};

}  // namespace chainsurv::io

#include "chainsurv/core/tensor.hpp"

namespace chainsurv::io {

// Constant (non-grad) n_tokens x dim tensor view of a chain.
core::Tensor as_tensor(const ModalityChain& chain);

}  // namespace chainsurv::io
