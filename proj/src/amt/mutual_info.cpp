#include "chainsurv/amt/mutual_info.hpp"

#include <algorithm>
#include <string>

#include <spdlog/spdlog.h>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::amt {

MiEstimator::MiEstimator(core::ParameterStore& store, std::size_t d, core::Rng& rng)
    : d_(d),
      fc1_(core::make_linear(store, "mi.fc1", 2 * d, d, rng)),
      fc2_(core::make_linear(store, "mi.fc2", d, 1, rng, false)) {}

core::Tensor MiEstimator::score(const core::Tensor& pairs) const {
  if (pairs.rank() != 2 || pairs.cols() != 2 * d_) {
    throw ContractViolation("MiEstimator: expected [n, " + std::to_string(2 * d_) + "], got " +
                            core::shape_string(pairs.shape()));
  }
  return fc2_(core::gelu(fc1_(pairs)));
}

MiLoss mi_loss(const std::vector<PerChain>& batch, const MiEstimator& estimator, std::uint64_t seed) {
  if (batch.empty()) throw ContractViolation("mi_loss: empty batch");
  std::vector<std::size_t> present;
  for (std::size_t m = 0; m < io::kModalityCount; ++m) {
    const bool first = batch.front()[m].defined();
    for (const PerChain& s : batch) {
      if (s[m].defined() != first) throw ContractViolation("mi_loss: samples disagree on which chains are present");
    }
    if (first) present.push_back(m);
  }

  MiLoss result;
  std::vector<core::Tensor> pair_losses;
  std::size_t pair_index = 0;
  for (std::size_t a = 0; a < present.size(); ++a) {
    for (std::size_t b = a + 1; b < present.size(); ++b, ++pair_index) {
      const std::size_t m1 = present[a], m2 = present[b];
      const bool needs_batch = std::any_of(batch.begin(), batch.end(), [&](const PerChain& s) {
        return std::min(s[m1].rows(), s[m2].rows()) < 2;
      });
      if (needs_batch && batch.size() < 2) {
        spdlog::warn("mi_loss: skipping pair ({}, {}): batch of one sample has no negatives for a length-1 chain",
                     io::to_string(static_cast<io::Modality>(m1)), io::to_string(static_cast<io::Modality>(m2)));
        ++result.pairs_skipped;
        continue;
      }
      core::Rng batch_rng(core::derive_seed(seed, pair_index, batch.size()));
      const std::vector<std::size_t> other =
          batch.size() >= 2 ? core::derangement(batch.size(), batch_rng) : std::vector<std::size_t>{};

      std::vector<core::Tensor> pos, neg;
      for (std::size_t s = 0; s < batch.size(); ++s) {
        const core::Tensor& x1 = batch[s][m1];
        const core::Tensor& x2 = batch[s][m2];
        const std::size_t n = std::min(x1.rows(), x2.rows());
        const core::Tensor left = core::slice_rows(x1, 0, n);
        pos.push_back(core::concat_last_axis({left, core::slice_rows(x2, 0, n)}));
        if (n >= 2) {
          core::Rng rng(core::derive_seed(seed, pair_index, s, 0x5A));
          neg.push_back(core::concat_last_axis({left, core::embedding_lookup(x2, core::derangement(n, rng))}));
        } else {
          neg.push_back(core::concat_last_axis({left, core::slice_rows(batch[other[s]][m2], 0, 1)}));
        }
      }
      const core::Tensor margin =
          core::sub(estimator.score(core::concat_rows(pos)), estimator.score(core::concat_rows(neg)));
      pair_losses.push_back(core::scale(core::mean(core::log_sigmoid(margin)), -1.0));
      ++result.pairs_computed;
    }
  }

  if (pair_losses.empty()) {
    result.loss = core::Tensor::scalar(0.0);
    return result;
  }
  core::Tensor total = pair_losses.front();
  for (std::size_t i = 1; i < pair_losses.size(); ++i) total = core::add(total, pair_losses[i]);
  result.loss = core::scale(total, 1.0 / static_cast<double>(pair_losses.size()));
  return result;
}

}  // namespace chainsurv::amt
