#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chainsurv/amt/interleave.hpp"
#include "chainsurv/core/nn.hpp"

namespace chainsurv::amt {

// Critic f(x1, x2): Linear(2d -> d), GELU, Linear(d -> 1). Parameters "mi.*".
class MiEstimator {
 public:
  MiEstimator(core::ParameterStore& store, std::size_t d, core::Rng& rng);

  // pairs: [n, 2d] rows of concatenated token pairs -> [n, 1] scores
  core::Tensor score(const core::Tensor& pairs) const;

  std::size_t dim() const { return d_; }

 private:
  std::size_t d_;
  core::Linear fc1_;
  core::Linear fc2_;
};

struct MiLoss {
  core::Tensor loss;  // scalar; constant 0 when no pair could be formed
  std::size_t pairs_computed = 0;
  std::size_t pairs_skipped = 0;
};

// Contrastive loss over every unordered pair of chains present in the batch
// (6 pairs for 4 chains). Positives are position-aligned tokens up to the
// shorter chain. Each positive gets one negative: the partner token taken
// under a seeded derangement of positions within the sample, or, when the
// aligned length is 1, the aligned token of another sample in the batch.
// Per pair: mean of -log sigmoid(f(pos) - f(neg)); the loss is the mean over
// pairs. A pair that needs batch negatives is skipped (with a warning) when
// the batch holds a single sample.
MiLoss mi_loss(const std::vector<PerChain>& batch, const MiEstimator& estimator, std::uint64_t seed);

}  // namespace chainsurv::amt
