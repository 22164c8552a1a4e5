#pragma once

#include <cstddef>
#include <vector>

#include "chainsurv/amt/interleave.hpp"
#include "chainsurv/core/nn.hpp"

namespace chainsurv::amt {

struct DecoderConfig {
  std::size_t d = 32;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t mlp_ratio = 2;
  std::size_t max_length = 64;  // longest L (excluding the start token)
};

struct AmtOutput {
  core::Tensor recon;        // L x d; row i predicts slot i from slots < i and the start token
  PerChain per_chain_recon;  // recon rows regrouped by source chain
};

// Pre-norm causal transformer that regresses the next interleaved token.
// Parameters live under "amt.*".
class AmtDecoder {
 public:
  AmtDecoder(core::ParameterStore& store, const DecoderConfig& config, core::Rng& rng);

  const core::Tensor& start_token() const { return start_; }
  const DecoderConfig& config() const { return config_; }

  AmtOutput forward(const InterleavedSequence& seq) const;

 private:
  struct Layer {
    core::Tensor ln1_gain, ln1_bias;
    core::Linear query, key, value, out;
    core::Tensor ln2_gain, ln2_bias;
    core::Linear fc1, fc2;
  };

  core::Tensor attention(const Layer& layer, const core::Tensor& h) const;

  DecoderConfig config_;
  core::Tensor start_;
  core::Tensor positions_;   // (max_length) x d
  core::Tensor chain_type_;  // 5 x d: one row per modality plus the start token
  std::vector<Layer> layers_;
  core::Tensor lnf_gain_, lnf_bias_;
  core::Linear head_;
};

// Mean squared error between recon and the true slot tokens (rows 1..L of
// seq.tokens), over non-pad slots only.
core::Tensor recon_loss(const AmtOutput& out, const InterleavedSequence& seq);

}  // namespace chainsurv::amt
