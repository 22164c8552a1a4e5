#include "chainsurv/metrics/kaplan_meier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::metrics {

double KMCurve::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

KMCurve km_estimate(std::span<const double> times, std::span<const int> censorship) {
  if (times.size() != censorship.size()) throw ContractViolation("km_estimate: input lengths differ");
  if (times.empty()) throw ValidationError("km_estimate: no subjects");

  std::map<double, std::pair<std::size_t, std::size_t>> at_time;  // time -> (observed, events)
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ValidationError("km_estimate: non-finite time");
    auto& [observed, events] = at_time[times[i]];
    ++observed;
    if (censorship[i] == 0) ++events;
  }

  KMCurve curve;
  std::size_t at_risk = times.size();
  double s = 1.0;
  double greenwood = 0.0;
  for (const auto& [t, counts] : at_time) {
    const auto [observed, events] = counts;
    if (events > 0) {
      const double n = static_cast<double>(at_risk);
      const double d = static_cast<double>(events);
      s *= 1.0 - d / n;
      if (events < at_risk) greenwood += d / (n * (n - d));
    }
    double low = s, high = s;
    if (s > 0.0 && s < 1.0 && greenwood > 0.0) {
      const double log_s = std::log(s);
      const double se = std::sqrt(greenwood) / std::abs(log_s);
      low = std::pow(s, std::exp(kZ95 * se));
      high = std::pow(s, std::exp(-kZ95 * se));
    }
    curve.times.push_back(t);
    curve.survival.push_back(s);
    curve.ci_low.push_back(std::min(low, s));
    curve.ci_high.push_back(std::max(high, s));
    curve.n_at_risk.push_back(at_risk);
    curve.n_events.push_back(events);
    at_risk -= observed;
  }
  return curve;
}

std::string km_csv(const KMCurve& curve) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "time,survival,ci_low,ci_high,n_at_risk\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    os << curve.times[i] << ',' << curve.survival[i] << ',' << curve.ci_low[i] << ',' << curve.ci_high[i] << ','
       << curve.n_at_risk[i] << '\n';
  }
  return os.str();
}

void write_km_csv(const KMCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << km_csv(curve);
}

}  // namespace chainsurv::metrics
