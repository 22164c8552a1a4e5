#include "chainsurv/io/binning.hpp"

#include <algorithm>
#include <cmath>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::io {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> compute_bin_edges(std::span<const double> times, std::span<const int> censorship, int n_bins) {
  if (n_bins < 2) throw ValidationError("need at least 2 time bins");
  if (times.size() != censorship.size()) throw ContractViolation("compute_bin_edges: length mismatch");
  std::vector<double> events;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (censorship[i] == 0) events.push_back(times[i]);
  }
  if (events.size() < static_cast<std::size_t>(n_bins)) {
    throw ValidationError("fewer uncensored samples (" + std::to_string(events.size()) + ") than time bins (" +
                          std::to_string(n_bins) + ")");
  }
  std::sort(events.begin(), events.end());
  std::vector<double> edges;
  edges.push_back(0.0);
  for (int j = 1; j < n_bins; ++j) edges.push_back(quantile_sorted(events, static_cast<double>(j) / n_bins));
  edges.push_back(*std::max_element(times.begin(), times.end()));
  for (std::size_t j = 1; j + 1 < edges.size(); ++j) {
    if (!(edges[j] > edges[j - 1])) throw ValidationError("degenerate bin edges");
  }
  if (edges.back() < edges[edges.size() - 2]) throw ValidationError("degenerate bin edges");
  return edges;
}

int bin_for_time(std::span<const double> edges, double time) {
  if (edges.size() < 3) throw ContractViolation("bin_for_time: need at least two bins");
  const int n_bins = static_cast<int>(edges.size()) - 1;
  // First interior edge strictly greater than time.
  const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, time);
  const int bin = static_cast<int>(it - (edges.begin() + 1));
  return std::clamp(bin, 0, n_bins - 1);
}

Cohort assign_time_bins(Cohort cohort, int n_bins) {
  std::vector<double> times;
  std::vector<int> cens;
  for (const auto& s : cohort.samples) {
    times.push_back(s.label.time);
    cens.push_back(s.label.censorship);
  }
  cohort.bin_edges = compute_bin_edges(times, cens, n_bins);
  apply_time_bins(cohort, cohort.bin_edges);
  return cohort;
}

void apply_time_bins(Cohort& cohort, std::span<const double> edges) {
  cohort.bin_edges.assign(edges.begin(), edges.end());
  for (auto& s : cohort.samples) s.label.time_bin = bin_for_time(edges, s.label.time);
}

}  // namespace chainsurv::io
