#pragma once

#include <cstddef>

#include "chainsurv/core/nn.hpp"
#include "chainsurv/io/modality.hpp"
#include "chainsurv/prompt/text_embedding.hpp"

namespace chainsurv::prompt {

// Prompt-conditioned adapter for one modality: the guidance embedding is
// concatenated to every token (d + d_text), then a two-layer MLP with a
// hidden width of d and ReLU maps back to d. Token count is preserved.
class ModalityAdapter {
 public:
  ModalityAdapter(core::ParameterStore& store, io::Modality modality, std::size_t d, std::size_t d_text,
                  core::Rng& rng);

  core::Tensor forward(const core::Tensor& raw, const TextEmbedding& guidance) const;

  io::Modality modality() const { return modality_; }
  const core::Linear& fc1() const { return fc1_; }
  const core::Linear& fc2() const { return fc2_; }

 private:
  io::Modality modality_;
  std::size_t d_;
  std::size_t d_text_;
  core::Linear fc1_;
  core::Linear fc2_;
};

// Text-free replacement used when the adapter is ablated: a single d -> d
// linear map so the chain can still enter the decoder.
class ChainProjection {
 public:
  ChainProjection(core::ParameterStore& store, io::Modality modality, std::size_t d, core::Rng& rng);
  core::Tensor forward(const core::Tensor& raw) const;

 private:
  core::Linear proj_;
};

}  // namespace chainsurv::prompt
