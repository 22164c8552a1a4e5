#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace chainsurv::prompt {

enum class EmbeddingSource { stub, file };

struct TextEmbedding {
  std::vector<double> vector;  // unit L2 norm
  EmbeddingSource source = EmbeddingSource::stub;

  std::size_t dim() const { return vector.size(); }
};

// Deterministic stand-in for a pretrained text encoder: lowercase words
// (split on non-alphanumerics) each hash to a bucket whose embedding is drawn
// from an RNG seeded by (bucket, seed); the word vectors are averaged and
// L2-normalized. d_text >= 8.
TextEmbedding text_embed_stub(std::string_view text, std::size_t d_text, std::uint64_t seed);

// Loads a precomputed 1 x d_text embedding from a .f32t file and normalizes it.
TextEmbedding load_text_embedding(const std::filesystem::path& path);

}  // namespace chainsurv::prompt
