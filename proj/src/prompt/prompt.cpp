#include "chainsurv/prompt/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::prompt {

namespace {

constexpr std::string_view kDefaultTemplates = R"(# built-in copy of data/prompts.txt
gene        | genomics              | An H&E stained image of {cancer}. The guidance describes the tumor through its {terms} profile.
meth        | methylation           | An H&E stained image of {cancer}. The guidance describes the tumor through its {terms} profile.
path_local  | Intercellular Bridges | An H&E stained image of {cancer}. At the local level, cropped patches reveal {terms}.
path_global | Tumor Boundaries      | An H&E stained image of {cancer}. At the global level, the whole slide reveals {terms}.
)";

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

PromptLibrary PromptLibrary::defaults() { return parse(kDefaultTemplates); }

PromptLibrary PromptLibrary::parse(std::string_view text) {
  PromptLibrary lib;
  std::array<bool, io::kModalityCount> seen{};
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, '|');
    if (fields.size() != 3) throw ValidationError("prompt template line needs 3 '|'-separated fields: " + t);
    const io::Modality m = io::modality_from_string(fields[0]);
    PromptTemplate tpl;
    for (auto& term : split(fields[1], ';')) {
      if (!term.empty()) tpl.detail_terms.push_back(term);
    }
    tpl.text = fields[2];
    if (!tpl.text.starts_with(kVanillaTemplate)) {
      throw ValidationError("prompt template for " + fields[0] + " must start with \"" +
                            std::string(kVanillaTemplate) + "\"");
    }
    if ((m == io::Modality::path_local || m == io::Modality::path_global) && tpl.detail_terms.empty()) {
      throw ValidationError("pathology prompt for " + fields[0] + " needs at least one detail term");
    }
    lib.templates_[io::index_of(m)] = std::move(tpl);
    seen[io::index_of(m)] = true;
  }
  for (io::Modality m : io::kCanonicalOrder) {
    if (!seen[io::index_of(m)]) throw ValidationError("prompt templates missing modality " + std::string(to_string(m)));
  }
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open prompt template file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

PromptSpec PromptLibrary::build(io::Modality modality, const std::string& cancer_type, bool vanilla_only) const {
  if (cancer_type.empty()) throw ContractViolation("build_prompt: cancer_type must be non-empty");
  const PromptTemplate& tpl = at(modality);
  PromptSpec spec;
  spec.modality = modality;
  spec.cancer_type = cancer_type;
  spec.detail_terms = tpl.detail_terms;
  spec.text = vanilla_only ? std::string(kVanillaTemplate) : tpl.text;
  std::string joined;
  for (std::size_t i = 0; i < tpl.detail_terms.size(); ++i) {
    if (i) joined += ", ";
    joined += tpl.detail_terms[i];
  }
  replace_all(spec.text, "{terms}", joined);
  replace_all(spec.text, "{cancer}", cancer_type);
  return spec;
}

PromptSpec build_prompt(io::Modality modality, const std::string& cancer_type) {
  static const PromptLibrary lib = PromptLibrary::defaults();
  return lib.build(modality, cancer_type);
}

}  // namespace chainsurv::prompt
