#pragma once

#include <span>
#include <vector>

#include "chainsurv/io/cohort.hpp"

namespace chainsurv::io {

inline constexpr int kDefaultBins = 4;

// Edges [0, q_1, ..., q_{n-1}, t_max]: interior cuts are linear-interpolation
// quantiles of the uncensored times, t_max is the largest time overall.
// Throws ValidationError with fewer uncensored samples than bins, or
// "degenerate bin edges" when the cuts are not strictly increasing.
std::vector<double> compute_bin_edges(std::span<const double> times, std::span<const int> censorship,
                                      int n_bins = kDefaultBins);

// Index of the half-open interval [e_j, e_{j+1}) holding `time`; the last bin
// is closed on the right and out-of-range times clamp to the end bins.
int bin_for_time(std::span<const double> edges, double time);

// Computes edges on the whole cohort, stores them, and labels every sample.
Cohort assign_time_bins(Cohort cohort, int n_bins = kDefaultBins);

// Labels every sample of `cohort` with existing edges (held-out folds).
void apply_time_bins(Cohort& cohort, std::span<const double> edges);

}  // namespace chainsurv::io
