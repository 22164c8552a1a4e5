#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "chainsurv/metrics/kaplan_meier.hpp"

namespace chainsurv::harness {

// Standalone SVG: one step polyline per group, shaded confidence bands as
// paths, a numbers-at-risk table and the log-rank p-value.
std::string km_svg(const metrics::KMCurve& high, const metrics::KMCurve& low, std::optional<double> p_value,
                   const std::string& title = "");

void emit_km_svg(const metrics::KMCurve& high, const metrics::KMCurve& low, std::optional<double> p_value,
                 const std::filesystem::path& out_path, const std::string& title = "");

std::string format_p_value(double p);

}  // namespace chainsurv::harness
