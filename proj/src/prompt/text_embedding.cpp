#include "chainsurv/prompt/text_embedding.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/rng.hpp"
#include "chainsurv/io/feature_file.hpp"

namespace chainsurv::prompt {

namespace {

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericFault("text embedding has zero or non-finite norm");
  for (double& x : v) x /= norm;
}

}  // namespace

TextEmbedding text_embed_stub(std::string_view text, std::size_t d_text, std::uint64_t seed) {
  if (d_text < 8) throw ContractViolation("text_embed_stub: d_text must be >= 8");
  const auto words = words_of(text);
  if (words.empty()) throw ValidationError("cannot embed empty text");
  TextEmbedding out;
  out.vector.assign(d_text, 0.0);
  for (const std::string& w : words) {
    core::Rng rng(core::derive_seed(seed, core::stable_hash(w)));
    for (double& x : out.vector) x += rng.normal();
  }
  for (double& x : out.vector) x /= static_cast<double>(words.size());
  normalize(out.vector);
  return out;
}

TextEmbedding load_text_embedding(const std::filesystem::path& path) {
  const io::ModalityChain m = io::read_f32t(path);
  if (m.n_tokens != 1) throw ValidationError("text embedding file must hold a single row: " + path.string());
  TextEmbedding out{m.values, EmbeddingSource::file};
  normalize(out.vector);
  return out;
}

}  // namespace chainsurv::prompt
