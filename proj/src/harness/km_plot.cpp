#include "chainsurv/harness/km_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::harness {

namespace {

constexpr double kWidth = 640, kHeight = 460;
constexpr double kLeft = 70, kRight = 30, kTop = 40, kPlotHeight = 300;
constexpr int kTicks = 5;

struct Style {
  const char* label;
  const char* color;
};
constexpr Style kHigh{"High risk", "#c0392b"};
constexpr Style kLow{"Low risk", "#2471a3"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Frame {
 public:
  explicit Frame(double t_max) : t_max_(t_max > 0 ? t_max : 1.0) {}
  double x(double t) const { return kLeft + (kWidth - kLeft - kRight) * t / t_max_; }
  double y(double s) const { return kTop + kPlotHeight * (1.0 - s); }

 private:
  double t_max_;
};

std::string step_points(const metrics::KMCurve& c, const Frame& f, double t_max) {
  std::ostringstream os;
  double s = 1.0;
  os << num(f.x(0)) << ',' << num(f.y(1.0));
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << ' ' << num(f.x(c.times[i])) << ',' << num(f.y(s));
    s = c.survival[i];
    os << ' ' << num(f.x(c.times[i])) << ',' << num(f.y(s));
  }
  os << ' ' << num(f.x(t_max)) << ',' << num(f.y(s));
  return os.str();
}

// Closed polygon: upper band left to right, lower band right to left.
std::string band_path(const metrics::KMCurve& c, const Frame& f, double t_max) {
  std::vector<std::pair<double, double>> upper{{0.0, 1.0}}, lower{{0.0, 1.0}};
  double hi = 1.0, lo = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    upper.emplace_back(c.times[i], hi);
    lower.emplace_back(c.times[i], lo);
    hi = c.ci_high[i];
    lo = c.ci_low[i];
    upper.emplace_back(c.times[i], hi);
    lower.emplace_back(c.times[i], lo);
  }
  upper.emplace_back(t_max, hi);
  lower.emplace_back(t_max, lo);
  std::ostringstream os;
  os << 'M' << num(f.x(upper[0].first)) << ',' << num(f.y(upper[0].second));
  for (std::size_t i = 1; i < upper.size(); ++i) os << " L" << num(f.x(upper[i].first)) << ',' << num(f.y(upper[i].second));
  for (std::size_t i = lower.size(); i-- > 0;) os << " L" << num(f.x(lower[i].first)) << ',' << num(f.y(lower[i].second));
  os << " Z";
  return os.str();
}

std::size_t at_risk(const metrics::KMCurve& c, double t) {
  const auto it = std::lower_bound(c.times.begin(), c.times.end(), t);
  if (it == c.times.end()) return 0;
  return c.n_at_risk[static_cast<std::size_t>(it - c.times.begin())];
}

}  // namespace

std::string format_p_value(double p) {
  char buf[48];
  if (p < 1e-4) std::snprintf(buf, sizeof buf, "%.2e", p);
  else std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

std::string km_svg(const metrics::KMCurve& high, const metrics::KMCurve& low, std::optional<double> p_value,
                   const std::string& title) {
  if (high.size() == 0 || low.size() == 0) throw ContractViolation("km_svg: curves must be non-empty");
  const double t_max = std::max(high.times.back(), low.times.back());
  const Frame f(t_max);
  const double x_end = kWidth - kRight;
  const double y_axis = kTop + kPlotHeight;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "  <text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
       << "</text>\n";
  }

  os << "  <g stroke=\"#444\" fill=\"none\">\n"
     << "    <line x1=\"" << kLeft << "\" y1=\"" << y_axis << "\" x2=\"" << x_end << "\" y2=\"" << y_axis << "\"/>\n"
     << "    <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << y_axis << "\"/>\n"
     << "  </g>\n";
  os << "  <g fill=\"#444\">\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double s = static_cast<double>(i) / kTicks;
    os << "    <text x=\"" << num(kLeft - 8) << "\" y=\"" << num(f.y(s) + 4) << "\" text-anchor=\"end\">" << num(s)
       << "</text>\n";
    const double t = t_max * i / kTicks;
    os << "    <text x=\"" << num(f.x(t)) << "\" y=\"" << num(y_axis + 16) << "\" text-anchor=\"middle\">"
       << num(t) << "</text>\n";
  }
  os << "    <text x=\"" << num((kLeft + x_end) / 2) << "\" y=\"" << num(y_axis + 34)
     << "\" text-anchor=\"middle\">Time</text>\n"
     << "    <text x=\"18\" y=\"" << num(kTop + kPlotHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << num(kTop + kPlotHeight / 2) << ")\">Survival probability</text>\n"
     << "  </g>\n";

  for (const auto& [curve, style] : {std::pair{&high, kHigh}, std::pair{&low, kLow}}) {
    os << "  <path class=\"band\" d=\"" << band_path(*curve, f, t_max) << "\" fill=\"" << style.color
       << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
  }
  for (const auto& [curve, style] : {std::pair{&high, kHigh}, std::pair{&low, kLow}}) {
    os << "  <polyline class=\"curve\" points=\"" << step_points(*curve, f, t_max) << "\" fill=\"none\" stroke=\""
       << style.color << "\" stroke-width=\"2\"/>\n";
  }

  // Legend and p-value in the upper right.
  os << "  <g>\n";
  double ly = kTop + 12;
  for (const Style& s : {kHigh, kLow}) {
    os << "    <line x1=\"" << num(x_end - 150) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(x_end - 128)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
       << "    <text x=\"" << num(x_end - 122) << "\" y=\"" << num(ly) << "\">" << s.label << "</text>\n";
    ly += 18;
  }
  os << "    <text class=\"p-value\" x=\"" << num(x_end - 150) << "\" y=\"" << num(ly) << "\">log-rank p = "
     << (p_value ? format_p_value(*p_value) : std::string("n/a")) << "</text>\n"
     << "  </g>\n";

  os << "  <g class=\"at-risk\" fill=\"#444\">\n"
     << "    <text x=\"8\" y=\"" << num(y_axis + 58) << "\">At risk</text>\n";
  double ry = y_axis + 76;
  for (const auto& [curve, style] : {std::pair{&high, kHigh}, std::pair{&low, kLow}}) {
    os << "    <text x=\"8\" y=\"" << num(ry) << "\" fill=\"" << style.color << "\">" << style.label << "</text>\n";
    for (int i = 0; i <= kTicks; ++i) {
      const double t = t_max * i / kTicks;
      os << "    <text x=\"" << num(f.x(t)) << "\" y=\"" << num(ry) << "\" text-anchor=\"middle\">"
         << at_risk(*curve, t) << "</text>\n";
    }
    ry += 18;
  }
  os << "  </g>\n</svg>\n";
  return os.str();
}

void emit_km_svg(const metrics::KMCurve& high, const metrics::KMCurve& low, std::optional<double> p_value,
                 const std::filesystem::path& out_path, const std::string& title) {
  const std::string svg = km_svg(high, low, p_value, title);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + out_path.string());
  out << svg;
  if (!out) throw ValidationError("failed writing " + out_path.string());
}

}  // namespace chainsurv::harness
