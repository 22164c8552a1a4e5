#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "chainsurv/core/gradcheck.hpp"

namespace chainsurv::harness {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double step = 1e-5;
  double threshold = 1e-3;
  bool corrupt_gradient = false;  // negative control: perturbs one analytic coordinate
};

struct GradcheckOutcome {
  core::GradCheckReport report;
  std::string worst_parameter;
  std::size_t sequence_length = 0;  // longest interleaved L in the toy batch
  std::size_t batch_size = 0;
  std::size_t parameter_count = 0;
  double seconds = 0.0;
  bool passed = false;
};

// Builds a d=8 toy model (all four chains, adapters, decoder and MI critic
// on) and checks the gradient of the full training objective over every
// parameter against central differences.
GradcheckOutcome run_gradcheck(const GradcheckOptions& options);

}  // namespace chainsurv::harness
