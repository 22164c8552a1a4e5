#include "chainsurv/harness/gradcheck_cmd.hpp"

#include <chrono>
#include <functional>
#include <vector>

#include "chainsurv/harness/model.hpp"
#include "chainsurv/synth/generator.hpp"

namespace chainsurv::harness {

GradcheckOutcome run_gradcheck(const GradcheckOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  constexpr std::size_t kDim = 8;
  constexpr std::size_t kBatch = 3;

  RunConfig config;
  config.d = kDim;
  config.n_gene = 3;
  config.n_meth = 4;
  config.k_patches = 3;

  synth::SynthSpec spec;
  spec.n = 10;
  spec.d = kDim;
  spec.n_gene = config.n_gene;
  spec.n_meth = config.n_meth;
  spec.k_patches = config.k_patches;
  spec.seed = options.seed;
  const synth::SynthCohort toy = synth::generate_cohort(spec);

  std::vector<PreparedSample> samples;
  GradcheckOutcome outcome;
  for (std::size_t i = 0; i < kBatch; ++i) {
    PreparedSample p = prepare(toy.cohort.samples[i]);
    // Cover both likelihood branches and several bins.
    p.label.censorship = static_cast<int>(i % 2);
    p.label.time_bin = static_cast<int>((i + 1) % 4);
    std::size_t length = 0;
    for (const auto& t : p.raw) length += t.rows();
    outcome.sequence_length = std::max(outcome.sequence_length, length);
    samples.push_back(std::move(p));
  }
  std::vector<const PreparedSample*> batch;
  for (const auto& s : samples) batch.push_back(&s);

  SurvivalModel model(config, kDim, core::derive_seed(options.seed, 0x6C));
  // Move every parameter off its initial value so zero-initialized biases and
  // unit gains are exercised at a generic point.
  core::Rng jitter(core::derive_seed(options.seed, 0x7A));
  for (auto& p : model.parameters().params()) {
    for (double& v : p.tensor.mutable_data()) v += 0.05 * jitter.normal();
  }

  const std::uint64_t mi_seed = core::derive_seed(options.seed, 0x31);
  auto objective = [&] { return model.batch_loss(batch, mi_seed).total; };
  auto tensors = model.parameters().tensors();
  std::function<void(std::vector<std::vector<double>>&)> hook;
  if (options.corrupt_gradient) {
    hook = [](std::vector<std::vector<double>>& grads) {
      for (auto& g : grads) {
        for (double& v : g) {
          if (v != 0.0) {
            v *= 1.5;
            return;
          }
        }
      }
    };
  }
  outcome.report = core::grad_check(objective, tensors, options.step, hook);
  outcome.worst_parameter = model.parameters().names().at(outcome.report.worst_tensor);
  outcome.batch_size = kBatch;
  outcome.parameter_count = outcome.report.coordinates;
  outcome.passed = outcome.report.max_relative_error < options.threshold;
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return outcome;
}

}  // namespace chainsurv::harness
