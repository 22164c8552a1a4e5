#include "chainsurv/amt/interleave.hpp"

#include <algorithm>
#include <string>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::amt {

InterleavedSequence interleave(const std::vector<ChainTokens>& chains, const core::Tensor& start) {
  if (chains.empty()) throw ContractViolation("interleave: no chains");
  if (start.rank() != 2 || start.rows() != 1) throw ContractViolation("interleave: start token must be [1, d]");
  const std::size_t d = start.cols();

  std::vector<const ChainTokens*> ordered;
  for (const auto& c : chains) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ChainTokens* a, const ChainTokens* b) {
    return io::index_of(a->modality) < io::index_of(b->modality);
  });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const ChainTokens& c = *ordered[i];
    const std::string name(io::to_string(c.modality));
    if (!c.tokens.defined()) throw ValidationError("interleave: empty " + name + " chain");
    if (c.tokens.rank() != 2 || c.tokens.cols() != d) {
      throw ContractViolation("interleave: " + name + " chain has shape " + core::shape_string(c.tokens.shape()) +
                              ", expected [n, " + std::to_string(d) + "]");
    }
    if (i > 0 && ordered[i - 1]->modality == c.modality) throw ContractViolation("interleave: duplicate " + name);
  }

  // Row offsets into the stacked [start; chain0; chain1; ...] matrix.
  std::vector<std::size_t> offset(ordered.size());
  std::size_t total = 1;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    offset[i] = total;
    total += ordered[i]->tokens.rows();
    longest = std::max(longest, ordered[i]->tokens.rows());
  }

  InterleavedSequence seq;
  std::vector<std::size_t> gather{0};
  for (std::size_t pos = 0; pos < longest; ++pos) {
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      if (pos >= ordered[i]->tokens.rows()) continue;
      seq.index_map.push_back({ordered[i]->modality, pos});
      gather.push_back(offset[i] + pos);
    }
  }
  seq.pad_mask.assign(seq.index_map.size(), true);

  std::vector<core::Tensor> parts{start};
  for (const auto* c : ordered) parts.push_back(c->tokens);
  seq.tokens = core::embedding_lookup(core::concat_rows(parts), gather);
  return seq;
}

PerChain deinterleave(const core::Tensor& slots, const InterleavedSequence& seq) {
  if (slots.rank() != 2 || slots.rows() != seq.length()) {
    throw ContractViolation("deinterleave: expected " + std::to_string(seq.length()) + " rows, got " +
                            core::shape_string(slots.shape()));
  }
  std::array<std::vector<std::size_t>, io::kModalityCount> rows;
  for (std::size_t i = 0; i < seq.length(); ++i) {
    const SlotRef& ref = seq.index_map[i];
    auto& r = rows[io::index_of(ref.modality)];
    if (r.size() <= ref.position) r.resize(ref.position + 1, seq.length());
    r[ref.position] = i;
  }
  PerChain out;
  for (std::size_t m = 0; m < io::kModalityCount; ++m) {
    if (rows[m].empty()) continue;
    for (std::size_t r : rows[m]) {
      if (r == seq.length()) throw ContractViolation("deinterleave: index map has a gap");
    }
    out[m] = core::embedding_lookup(slots, rows[m]);
  }
  return out;
}

}  // namespace chainsurv::amt
