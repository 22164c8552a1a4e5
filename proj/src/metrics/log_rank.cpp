#include "chainsurv/metrics/log_rank.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/special_functions/gamma.hpp>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::metrics {

double chi2_sf(double x, int dof) {
  if (dof < 1) throw ContractViolation("chi2_sf: dof must be >= 1");
  if (std::isnan(x) || x < 0.0) throw ContractViolation("chi2_sf: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

LogRankResult log_rank(std::span<const double> times_a, std::span<const int> cens_a,
                       std::span<const double> times_b, std::span<const int> cens_b) {
  if (times_a.size() != cens_a.size() || times_b.size() != cens_b.size()) {
    throw ContractViolation("log_rank: input lengths differ");
  }
  if (times_a.empty() || times_b.empty()) throw ValidationError("log_rank: both groups must be non-empty");

  struct Tally {
    double removed_a = 0, removed_b = 0, events_a = 0, events_b = 0;
  };
  std::map<double, Tally> by_time;
  for (std::size_t i = 0; i < times_a.size(); ++i) {
    auto& t = by_time[times_a[i]];
    t.removed_a += 1;
    if (cens_a[i] == 0) t.events_a += 1;
  }
  for (std::size_t i = 0; i < times_b.size(); ++i) {
    auto& t = by_time[times_b[i]];
    t.removed_b += 1;
    if (cens_b[i] == 0) t.events_b += 1;
  }

  double n_a = static_cast<double>(times_a.size());
  double n_b = static_cast<double>(times_b.size());
  double observed_minus_expected = 0.0;
  double variance = 0.0;
  for (const auto& [time, t] : by_time) {
    const double d = t.events_a + t.events_b;
    const double n = n_a + n_b;
    if (d > 0) {
      observed_minus_expected += t.events_a - d * n_a / n;
      if (n > 1) variance += d * (n_a / n) * (n_b / n) * (n - d) / (n - 1);
    }
    n_a -= t.removed_a;
    n_b -= t.removed_b;
  }
  if (!(variance > 0.0)) throw ValidationError("log_rank: zero variance (no informative events)");
  LogRankResult r;
  r.statistic = observed_minus_expected * observed_minus_expected / variance;
  r.p_value = chi2_sf(r.statistic, 1);
  return r;
}

std::vector<bool> median_split(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("median_split: no scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<bool> high(n);
  for (std::size_t i = 0; i < n; ++i) high[i] = scores[i] > median;
  return high;
}

}  // namespace chainsurv::metrics
