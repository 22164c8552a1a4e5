#include "chainsurv/io/folds.hpp"

#include <numeric>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/rng.hpp"

namespace chainsurv::io {

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k-fold split needs k >= 2");
  if (n < k) throw ValidationError("cannot split " + std::to_string(n) + " samples into " + std::to_string(k) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  core::Rng rng(core::derive_seed(seed, 0x6B666F6C64ULL));
  core::shuffle(std::span<std::size_t>(order), rng);
  FoldSplit split{k, seed, std::vector<std::size_t>(n)};
  for (std::size_t pos = 0; pos < n; ++pos) split.fold_of[order[pos]] = pos % k;
  return split;
}

}  // namespace chainsurv::io
