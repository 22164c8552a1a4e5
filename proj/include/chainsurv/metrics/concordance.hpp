#pragma once

#include <cstdint>
#include <span>

namespace chainsurv::metrics {

struct ConcordanceCounts {
  std::uint64_t comparable = 0;
  std::uint64_t half_units = 0;  // 2 * concordant + score ties
  double value() const { return static_cast<double>(half_units) / (2.0 * static_cast<double>(comparable)); }
};

// Harrell's C over pairs (i, j) with t_i < t_j and i uncensored (censorship
// 0). A pair is concordant when score_i > score_j; score ties count 1/2.
// O(n log n). Throws ValidationError when no pair is comparable.
ConcordanceCounts concordance_counts(std::span<const double> scores, std::span<const double> times,
                                     std::span<const int> censorship);
double c_index(std::span<const double> scores, std::span<const double> times, std::span<const int> censorship);

}  // namespace chainsurv::metrics
