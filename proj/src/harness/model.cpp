#include "chainsurv/harness/model.hpp"

#include <cmath>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::harness {

PreparedSample prepare(const io::CohortSample& sample) {
  PreparedSample p;
  p.id = sample.id;
  p.cancer_type = sample.cancer_type;
  for (std::size_t m = 0; m < io::kModalityCount; ++m) p.raw[m] = io::as_tensor(sample.chains[m]);
  p.label = sample.label;
  return p;
}

GuidanceTable::GuidanceTable(const RunConfig& config, std::size_t d_text)
    : library_(config.prompts.empty() ? prompt::PromptLibrary::defaults() : prompt::PromptLibrary::load(config.prompts)),
      embeddings_dir_(config.text_embeddings),
      d_text_(d_text),
      vanilla_(config.ablation.vanilla_prompt_only) {}

const prompt::TextEmbedding& GuidanceTable::get(const std::string& cancer_type, io::Modality modality) {
  const auto key = std::make_pair(cancer_type, modality);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  prompt::TextEmbedding e;
  if (!embeddings_dir_.empty()) {
    const auto variant = vanilla_ ? "_vanilla" : "";
    e = prompt::load_text_embedding(embeddings_dir_ /
                                    (cancer_type + "_" + std::string(io::to_string(modality)) + variant + ".f32t"));
    if (e.dim() != d_text_) {
      throw ValidationError("text embedding for " + cancer_type + "/" + std::string(io::to_string(modality)) +
                            " has dim " + std::to_string(e.dim()) + ", expected " + std::to_string(d_text_));
    }
  } else {
    e = prompt::text_embed_stub(library_.build(modality, cancer_type, vanilla_).text, d_text_, 0);
  }
  return cache_.emplace(key, std::move(e)).first->second;
}

SurvivalModel::SurvivalModel(const RunConfig& config, std::size_t d, std::uint64_t seed)
    : config_(config),
      d_(d),
      max_length_(config.n_gene + config.n_meth + config.k_patches + 1),
      guidance_(config, config.d_text == 0 ? d : config.d_text) {
  validate(config);
  if (d == 0) throw ContractViolation("SurvivalModel: d must be positive");
  const std::size_t d_text = config.d_text == 0 ? d : config.d_text;
  core::Rng rng(seed);
  const auto& ab = config.ablation;
  if (ab.use_amt) {
    for (io::Modality m : io::kCanonicalOrder) {
      if (!ab.enabled_modalities[io::index_of(m)]) continue;
      if (ab.use_adapter) {
        slot_[io::index_of(m)] = static_cast<int>(adapters_.size());
        adapters_.emplace_back(store_, m, d, d_text, rng);
      } else {
        slot_[io::index_of(m)] = static_cast<int>(projections_.size());
        projections_.emplace_back(store_, m, d, rng);
      }
    }
    decoder_.emplace(store_,
                     amt::DecoderConfig{.d = d,
                                        .heads = kAttentionHeads,
                                        .layers = kTransformerLayers,
                                        .mlp_ratio = 2,
                                        .max_length = max_length_},
                     rng);
    if (ab.use_mi) critic_.emplace(store_, d, rng);
    inter_.emplace(store_, d, rng);
  }
  intra_.emplace(store_, d, rng);
  classifier_.emplace(store_, ab.use_amt ? 2 * d : d, rng);
}

SampleForward SurvivalModel::forward(const PreparedSample& sample) {
  for (std::size_t m = 0; m < io::kModalityCount; ++m) {
    if (!sample.raw[m].defined() || sample.raw[m].cols() != d_) {
      throw ContractViolation("sample '" + sample.id + "': chain dim does not match model dim " + std::to_string(d_));
    }
  }
  SampleForward out;
  const core::Tensor intra = intra_->forward(sample.raw);
  if (!decoder_) {
    out.hazard = classifier_->forward(intra);
    return out;
  }
  std::vector<amt::ChainTokens> chains;
  for (io::Modality m : io::kCanonicalOrder) {
    const int slot = slot_[io::index_of(m)];
    if (slot < 0) continue;
    const core::Tensor& raw = sample.raw[io::index_of(m)];
    const core::Tensor adapted = config_.ablation.use_adapter
                                     ? adapters_[static_cast<std::size_t>(slot)].forward(
                                           raw, guidance_.get(sample.cancer_type, m))
                                     : projections_[static_cast<std::size_t>(slot)].forward(raw);
    chains.push_back({m, adapted});
  }
  const amt::InterleavedSequence seq = amt::interleave(chains, decoder_->start_token());
  const amt::AmtOutput decoded = decoder_->forward(seq);
  out.recon_loss = amt::recon_loss(decoded, seq);
  out.chain_recon = decoded.per_chain_recon;
  out.hazard = classifier_->forward(intra, inter_->forward(decoded, seq));
  return out;
}

BatchLoss SurvivalModel::batch_loss(std::span<const PreparedSample* const> batch, std::uint64_t mi_seed) {
  if (batch.empty()) throw ContractViolation("batch_loss: empty batch");
  const auto form = config_.eq1_literal ? head::NllForm::censored_term_only : head::NllForm::full;
  const double inv = 1.0 / static_cast<double>(batch.size());
  core::Tensor surv, rec;
  std::vector<amt::PerChain> recon;
  for (const PreparedSample* s : batch) {
    const SampleForward f = forward(*s);
    const core::Tensor nll = head::surv_nll(f.hazard.logits, s->label, form);
    surv = surv.defined() ? core::add(surv, nll) : nll;
    if (f.recon_loss.defined()) {
      rec = rec.defined() ? core::add(rec, f.recon_loss) : f.recon_loss;
      recon.push_back(f.chain_recon);
    }
  }
  BatchLoss out;
  surv = core::scale(surv, inv);
  out.surv = surv.item();
  if (!rec.defined()) {
    out.total = surv;
    return out;
  }
  rec = core::scale(rec, inv);
  out.rec = rec.item();
  core::Tensor mi = core::Tensor::scalar(0.0);
  if (critic_) {
    amt::MiLoss m = amt::mi_loss(recon, *critic_, mi_seed);
    mi = m.loss;
    out.mi = mi.item();
    out.mi_pairs = m.pairs_computed;
  }
  out.total = critic_ ? head::total_loss(surv, rec, mi, config_.lambda) : core::add(surv, rec);
  return out;
}

double SurvivalModel::risk(const PreparedSample& sample) { return head::risk_score(forward(sample).hazard); }

}  // namespace chainsurv::harness
