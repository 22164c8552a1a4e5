#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chainsurv/io/cohort.hpp"

namespace chainsurv::synth {

struct SynthSpec {
  std::size_t n = 500;
  std::size_t d = 32;
  std::size_t n_gene = 6;
  std::size_t n_meth = 8;
  std::size_t k_patches = 16;  // path_local length is uniform in [k/2, k]
  double signal_strength = 2.0;
  double censor_rate = 0.3;
  std::uint64_t seed = 0;
  // gene, meth, path_local, path_global
  std::array<double, io::kModalityCount> informativeness{0.8, 0.6, 0.5, 0.7};
  double noise_std = 1.0;
  double base_rate = 1.0 / 30.0;
  std::string cancer_type = "BRCA";
};

void validate(const SynthSpec& spec);

struct SynthCohort {
  io::Cohort cohort;                // time bins left unassigned
  std::vector<double> oracle_risk;  // latent z per sample, same order
};

// z ~ N(0, 1); event time ~ Exp(base_rate * exp(signal_strength * z));
// independent censoring time ~ Exp(rc) with rc solved so the expected
// censored fraction equals censor_rate. Every token is
// informativeness[m] * z * u_m + noise_std * eps with u_m a fixed random unit
// direction per modality. Feature values are rounded to float32 so a saved
// and reloaded cohort is bit-identical to the in-memory one.
SynthCohort generate_cohort(const SynthSpec& spec);

// Censoring rate giving E[P(C < T)] = censor_rate under the spec's event model.
double calibrated_censoring_rate(const SynthSpec& spec);
double expected_censor_fraction(const SynthSpec& spec, double censoring_rate);

// Sidecar CSV "id,z".
void write_oracle_csv(const SynthCohort& synth, const std::filesystem::path& path);

}  // namespace chainsurv::synth
