#include "chainsurv/synth/generator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/rng.hpp"

namespace chainsurv::synth {

namespace {

enum Stream : std::uint64_t { kDirections = 1, kLatent, kEvent, kCensor, kTokens, kLocalLength };

double expected_censored(double signal, double base_rate, double rc) {
  // E_z[rc / (rc + base_rate * exp(signal z))], trapezoid over z in [-10, 10]
  constexpr int kSteps = 4000;
  constexpr double kLo = -10.0, kHi = 10.0;
  const double h = (kHi - kLo) / kSteps;
  double total = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double z = kLo + h * i;
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double rate = base_rate * std::exp(signal * z);
    const double w = (i == 0 || i == kSteps) ? 0.5 : 1.0;
    total += w * density * rc / (rc + rate);
  }
  return total * h;
}

std::string sample_id(std::size_t i, std::size_t n) {
  const int width = n > 10000 ? static_cast<int>(std::to_string(n - 1).size()) : 4;
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, i);
  return buf;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n < 10) throw ValidationError("synth: n must be >= 10");
  if (spec.d == 0 || spec.n_gene == 0 || spec.n_meth == 0 || spec.k_patches == 0) {
    throw ValidationError("synth: d and chain lengths must be positive");
  }
  if (!(spec.censor_rate >= 0.0 && spec.censor_rate < 1.0)) throw ValidationError("synth: censor_rate must be in [0, 1)");
  if (!(spec.signal_strength >= 0.0) || !std::isfinite(spec.signal_strength)) {
    throw ValidationError("synth: signal_strength must be finite and >= 0");
  }
  for (double w : spec.informativeness) {
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("synth: informativeness must be in [0, 1]");
  }
  if (!(spec.noise_std >= 0.0) || !(spec.base_rate > 0.0)) {
    throw ValidationError("synth: noise_std must be >= 0 and base_rate > 0");
  }
  if (spec.cancer_type.empty()) throw ValidationError("synth: cancer_type must be non-empty");
}

double expected_censor_fraction(const SynthSpec& spec, double censoring_rate) {
  return expected_censored(spec.signal_strength, spec.base_rate, censoring_rate);
}

double calibrated_censoring_rate(const SynthSpec& spec) {
  if (spec.censor_rate == 0.0) return 0.0;
  // The fraction is increasing in rc; bisect on log rc.
  double lo = std::log(spec.base_rate) - 40.0, hi = std::log(spec.base_rate) + 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_censor_fraction(spec, std::exp(mid)) < spec.censor_rate) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

SynthCohort generate_cohort(const SynthSpec& spec) {
  validate(spec);
  const double rc = calibrated_censoring_rate(spec);

  core::Rng dir_rng(core::derive_seed(spec.seed, kDirections));
  std::array<std::vector<double>, io::kModalityCount> direction;
  for (auto& u : direction) {
    u.resize(spec.d);
    double norm = 0.0;
    for (double& x : u) {
      x = dir_rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : u) x /= norm;
  }

  core::Rng latent_rng(core::derive_seed(spec.seed, kLatent));
  core::Rng event_rng(core::derive_seed(spec.seed, kEvent));
  core::Rng censor_rng(core::derive_seed(spec.seed, kCensor));
  core::Rng token_rng(core::derive_seed(spec.seed, kTokens));
  core::Rng length_rng(core::derive_seed(spec.seed, kLocalLength));

  SynthCohort out;
  out.cohort.dim = spec.d;
  out.cohort.samples.reserve(spec.n);
  out.oracle_risk.reserve(spec.n);
  const std::size_t local_min = std::max<std::size_t>(1, spec.k_patches / 2);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = latent_rng.normal();
    const double event = event_rng.exponential(spec.base_rate * std::exp(spec.signal_strength * z));
    const double censor = rc > 0.0 ? censor_rng.exponential(rc) : std::numeric_limits<double>::infinity();

    io::CohortSample s;
    s.id = sample_id(i, spec.n);
    s.cancer_type = spec.cancer_type;
    s.label.censorship = censor < event ? 1 : 0;
    s.label.time = std::min(event, censor);

    const std::array<std::size_t, io::kModalityCount> lengths{
        spec.n_gene, spec.n_meth, local_min + length_rng.below(spec.k_patches - local_min + 1), 1};
    for (std::size_t m = 0; m < io::kModalityCount; ++m) {
      io::ModalityChain& chain = s.chains[m];
      chain.n_tokens = lengths[m];
      chain.dim = spec.d;
      chain.values.resize(lengths[m] * spec.d);
      const double amplitude = spec.informativeness[m] * z;
      for (std::size_t t = 0; t < lengths[m]; ++t) {
        for (std::size_t k = 0; k < spec.d; ++k) {
          const double v = amplitude * direction[m][k] + spec.noise_std * token_rng.normal();
          chain.values[t * spec.d + k] = static_cast<double>(static_cast<float>(v));
        }
      }
    }
    out.cohort.samples.push_back(std::move(s));
    out.oracle_risk.push_back(z);
  }
  return out;
}

void write_oracle_csv(const SynthCohort& synth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "id,z\n" << std::setprecision(17);
  for (std::size_t i = 0; i < synth.cohort.size(); ++i) {
    out << synth.cohort.samples[i].id << ',' << synth.oracle_risk[i] << '\n';
  }
}

}  // namespace chainsurv::synth
