#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chainsurv/io/modality.hpp"

namespace chainsurv::harness {

struct AblationFlags {
  bool use_adapter = true;          // false: plain d -> d projection per chain
  bool use_amt = true;              // false: intra branch only
  bool use_mi = true;               // false: lambda term dropped
  bool vanilla_prompt_only = false;
  // Chains fed to the inter branch (adapter + decoder + MI). The intra branch
  // always sees every chain.
  std::array<bool, io::kModalityCount> enabled_modalities{true, true, true, true};

  bool operator==(const AblationFlags&) const = default;
};

struct RunConfig {
  std::filesystem::path cohort;      // manifest.csv
  std::filesystem::path prompts;     // optional template file; built-ins when empty
  std::filesystem::path text_embeddings;  // optional dir of <cancer>_<modality>.f32t
  std::size_t d = 0;                 // 0: take the cohort's token dim
  std::size_t d_text = 0;            // 0: same as d
  std::size_t n_gene = 6;
  std::size_t n_meth = 8;
  std::size_t k_patches = 16;        // path_local chains are capped to this many tokens
  double lambda = 0.3;
  double lr = 1e-4;
  double weight_decay = 1e-2;
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  std::size_t folds = 5;
  std::size_t bins = 4;
  std::uint64_t seed = 0;
  AblationFlags ablation;
  bool eq1_literal = false;

  bool operator==(const RunConfig&) const = default;
};

// Sets one key from its text form. Keys match the config file:
//   cohort prompts text_embeddings d d_text n_gene n_meth k_patches lambda lr
//   weight_decay epochs batch_size folds bins seed use_adapter use_amt use_mi
//   vanilla_prompt_only enabled_modalities loss.eq1_literal ablation
// Throws ValidationError on unknown keys or malformed values.
void set_option(RunConfig& config, std::string_view key, std::string_view value);

// Flat "key = value" lines; '#' starts a comment. Relative paths are
// resolved against the file's directory.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Named presets (may be combined):
//   only_intra, basic, no_adapter, no_mi, vanilla_prompt,
//   no_gene, no_meth, no_path_local, no_path_global, eq1_literal
void apply_ablation(RunConfig& config, std::string_view name);
std::vector<std::string> ablation_names();

void validate(const RunConfig& config);

// key = value lines that parse_config reads back to the same config.
std::string to_config_text(const RunConfig& config);

}  // namespace chainsurv::harness
