#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainsurv/amt/decoder.hpp"
#include "chainsurv/amt/mutual_info.hpp"
#include "chainsurv/harness/config.hpp"
#include "chainsurv/head/survival_head.hpp"
#include "chainsurv/io/cohort.hpp"
#include "chainsurv/prompt/adapter.hpp"
#include "chainsurv/prompt/prompt.hpp"

namespace chainsurv::harness {

inline constexpr std::size_t kTransformerLayers = 2;
inline constexpr std::size_t kAttentionHeads = 4;

// Raw chains as constant tensors plus the label, built once per sample.
struct PreparedSample {
  std::string id;
  std::string cancer_type;
  std::array<core::Tensor, io::kModalityCount> raw;
  io::SurvivalLabel label;
};

PreparedSample prepare(const io::CohortSample& sample);

// Text guidance per (cancer type, modality), computed once and reused.
class GuidanceTable {
 public:
  GuidanceTable(const RunConfig& config, std::size_t d_text);
  const prompt::TextEmbedding& get(const std::string& cancer_type, io::Modality modality);

 private:
  prompt::PromptLibrary library_;
  std::filesystem::path embeddings_dir_;
  std::size_t d_text_;
  bool vanilla_;
  std::map<std::pair<std::string, io::Modality>, prompt::TextEmbedding> cache_;
};

struct SampleForward {
  head::HazardOutput hazard;
  core::Tensor recon_loss;      // undefined without the inter branch
  amt::PerChain chain_recon;    // decoder output regrouped by chain
};

struct BatchLoss {
  core::Tensor total;
  double surv = 0.0;
  double rec = 0.0;
  double mi = 0.0;
  std::size_t mi_pairs = 0;
};

// The full model: per-chain adapters (or projections) feeding the decoder
// on the inter branch, the pooled projector on the intra branch, and the
// hazard classifier on their concatenation.
class SurvivalModel {
 public:
  SurvivalModel(const RunConfig& config, std::size_t d, std::uint64_t seed);

  SampleForward forward(const PreparedSample& sample);
  // L_surv + L_rec + lambda * L_MI, each averaged over the batch.
  BatchLoss batch_loss(std::span<const PreparedSample* const> batch, std::uint64_t mi_seed);
  double risk(const PreparedSample& sample);

  core::ParameterStore& parameters() { return store_; }
  const RunConfig& config() const { return config_; }
  std::size_t dim() const { return d_; }
  std::size_t transformer_layers() const { return decoder_ ? decoder_->config().layers : 0; }
  std::size_t hazard_bins() const { return classifier_->bins(); }
  std::size_t max_sequence_length() const { return max_length_; }
  bool has_inter_branch() const { return decoder_.has_value(); }

 private:
  RunConfig config_;
  std::size_t d_;
  std::size_t max_length_;
  core::ParameterStore store_;
  GuidanceTable guidance_;
  std::vector<prompt::ModalityAdapter> adapters_;
  std::vector<prompt::ChainProjection> projections_;
  std::array<int, io::kModalityCount> slot_{-1, -1, -1, -1};
  std::optional<amt::AmtDecoder> decoder_;
  std::optional<amt::MiEstimator> critic_;
  std::optional<head::InterProjector> inter_;
  std::optional<head::IntraProjector> intra_;
  std::optional<head::HazardClassifier> classifier_;
};

}  // namespace chainsurv::harness
