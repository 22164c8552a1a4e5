#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace chainsurv::io {

struct FoldSplit {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // sample index -> fold

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Seeded shuffle, then round-robin assignment: fold sizes differ by at most 1.
FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace chainsurv::io
