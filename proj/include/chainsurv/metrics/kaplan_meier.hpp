#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace chainsurv::metrics {

inline constexpr double kZ95 = 1.959963984540054;

// One point per distinct observed time. survival steps down only at times
// with events; n_at_risk counts subjects with time >= that point.
struct KMCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<std::size_t> n_at_risk;
  std::vector<std::size_t> n_events;

  std::size_t size() const { return times.size(); }
  // Step-function value at t (1 before the first point).
  double at(double t) const;
};

// Product-limit estimate with Greenwood variance and 95% bands on the
// log(-log S) scale. censorship 1 = censored.
KMCurve km_estimate(std::span<const double> times, std::span<const int> censorship);

// CSV: time,survival,ci_low,ci_high,n_at_risk
std::string km_csv(const KMCurve& curve);
void write_km_csv(const KMCurve& curve, const std::filesystem::path& path);

}  // namespace chainsurv::metrics
