#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chainsurv/io/modality.hpp"

namespace chainsurv::prompt {

inline constexpr std::string_view kVanillaTemplate = "An H&E stained image of {cancer}.";

struct PromptSpec {
  io::Modality modality = io::Modality::gene;
  std::string cancer_type;
  std::string text;
  std::vector<std::string> detail_terms;
};

struct PromptTemplate {
  std::vector<std::string> detail_terms;
  std::string text;  // contains {cancer} and optionally {terms}
};

// Per-modality prompt templates. The text format is one line per modality,
//   <modality> | <term; term; ...> | <template>
// with '#' comments; see data/prompts.txt.
class PromptLibrary {
 public:
  static PromptLibrary defaults();
  static PromptLibrary parse(std::string_view text);
  static PromptLibrary load(const std::filesystem::path& path);

  // vanilla_only drops the modality detail and keeps just the vanilla prompt.
  PromptSpec build(io::Modality modality, const std::string& cancer_type, bool vanilla_only = false) const;

  const PromptTemplate& at(io::Modality m) const { return templates_[io::index_of(m)]; }

 private:
  std::array<PromptTemplate, io::kModalityCount> templates_;
};

// Uses the built-in templates.
PromptSpec build_prompt(io::Modality modality, const std::string& cancer_type);

}  // namespace chainsurv::prompt
