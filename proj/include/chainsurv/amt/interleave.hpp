#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "chainsurv/core/tensor.hpp"
#include "chainsurv/io/modality.hpp"

namespace chainsurv::amt {

struct SlotRef {
  io::Modality modality = io::Modality::gene;
  std::size_t position = 0;

  bool operator==(const SlotRef&) const = default;
};

struct ChainTokens {
  io::Modality modality = io::Modality::gene;
  core::Tensor tokens;  // n x d, n >= 1
};

// One tensor per modality slot; absent modalities hold an undefined tensor.
using PerChain = std::array<core::Tensor, io::kModalityCount>;

struct InterleavedSequence {
  core::Tensor tokens;              // (1 + L) x d, row 0 is the start token
  std::vector<SlotRef> index_map;   // slot i (0-based) -> source token, length L
  std::vector<bool> pad_mask;       // true = real token

  std::size_t length() const { return index_map.size(); }
};

// Round-robin over the chains in canonical modality order, skipping chains
// that are exhausted, with `start` ([1, d]) prepended. Chains may be given in
// any order and any subset of modalities, each at most once.
InterleavedSequence interleave(const std::vector<ChainTokens>& chains, const core::Tensor& start);

// Gathers the L x d rows of `slots` back into per-modality chains using the
// index map of `seq`. Inverse of interleave when given seq's own token rows.
PerChain deinterleave(const core::Tensor& slots, const InterleavedSequence& seq);

}  // namespace chainsurv::amt
