#pragma once

#include <span>
#include <vector>

namespace chainsurv::metrics {

struct LogRankResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 1;
};

// Upper tail of the chi-square distribution. x >= 0, dof >= 1.
double chi2_sf(double x, int dof = 1);

// Two-group log-rank test with hypergeometric variance. censorship 1 =
// censored. Throws ValidationError on an empty group or zero variance.
LogRankResult log_rank(std::span<const double> times_a, std::span<const int> cens_a,
                       std::span<const double> times_b, std::span<const int> cens_b);

// true = high-risk group: score strictly above the median. Ties at the
// median stay in the low-risk group.
std::vector<bool> median_split(std::span<const double> scores);

}  // namespace chainsurv::metrics
