#include "chainsurv/amt/decoder.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::amt {

namespace {

constexpr double kEmbeddingStd = 0.02;
constexpr std::size_t kStartType = io::kModalityCount;

}  // namespace

AmtDecoder::AmtDecoder(core::ParameterStore& store, const DecoderConfig& config, core::Rng& rng)
    : config_(config) {
  const std::size_t d = config.d;
  if (d == 0 || config.heads == 0 || d % config.heads != 0) {
    throw ContractViolation("AmtDecoder: d=" + std::to_string(d) + " is not divisible by heads=" +
                            std::to_string(config.heads));
  }
  if (config.max_length == 0) throw ContractViolation("AmtDecoder: max_length must be positive");
  start_ = store.normal("amt.start", {1, d}, kEmbeddingStd, rng);
  positions_ = store.normal("amt.position", {config.max_length, d}, kEmbeddingStd, rng);
  chain_type_ = store.normal("amt.chain_type", {io::kModalityCount + 1, d}, kEmbeddingStd, rng);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "amt.layer" + std::to_string(l);
    Layer layer;
    layer.ln1_gain = store.create(p + ".ln1.g", {1, d}, std::vector<double>(d, 1.0));
    layer.ln1_bias = store.zeros(p + ".ln1.b", {1, d});
    layer.query = core::make_linear(store, p + ".attn.q", d, d, rng, false);
    layer.key = core::make_linear(store, p + ".attn.k", d, d, rng, false);
    layer.value = core::make_linear(store, p + ".attn.v", d, d, rng, false);
    layer.out = core::make_linear(store, p + ".attn.o", d, d, rng);
    layer.ln2_gain = store.create(p + ".ln2.g", {1, d}, std::vector<double>(d, 1.0));
    layer.ln2_bias = store.zeros(p + ".ln2.b", {1, d});
    layer.fc1 = core::make_linear(store, p + ".mlp.fc1", d, config.mlp_ratio * d, rng);
    layer.fc2 = core::make_linear(store, p + ".mlp.fc2", config.mlp_ratio * d, d, rng);
    layers_.push_back(std::move(layer));
  }
  lnf_gain_ = store.create("amt.ln_f.g", {1, d}, std::vector<double>(d, 1.0));
  lnf_bias_ = store.zeros("amt.ln_f.b", {1, d});
  head_ = core::make_linear(store, "amt.head", d, d, rng);
}

core::Tensor AmtDecoder::attention(const Layer& layer, const core::Tensor& h) const {
  const std::size_t dh = config_.d / config_.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const core::Tensor q = layer.query(h);
  const core::Tensor k = layer.key(h);
  const core::Tensor v = layer.value(h);
  std::vector<core::Tensor> heads;
  heads.reserve(config_.heads);
  for (std::size_t i = 0; i < config_.heads; ++i) {
    const core::Tensor qi = core::slice_cols(q, i * dh, dh);
    const core::Tensor ki = core::slice_cols(k, i * dh, dh);
    const core::Tensor vi = core::slice_cols(v, i * dh, dh);
    const core::Tensor scores = core::scale(core::matmul(qi, core::transpose(ki)), inv_sqrt);
    heads.push_back(core::matmul(core::softmax_rows(scores, core::RowMask::causal), vi));
  }
  return layer.out(core::concat_last_axis(heads));
}

AmtOutput AmtDecoder::forward(const InterleavedSequence& seq) const {
  const std::size_t L = seq.length();
  if (L == 0) throw ContractViolation("amt_forward: empty sequence");
  if (L > config_.max_length) {
    throw ContractViolation("amt_forward: sequence length " + std::to_string(L) + " exceeds max_length " +
                            std::to_string(config_.max_length));
  }
  if (seq.tokens.cols() != config_.d || seq.tokens.rows() != L + 1) {
    throw ContractViolation("amt_forward: tokens have shape " + core::shape_string(seq.tokens.shape()));
  }

  std::vector<std::size_t> pos(L);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::vector<std::size_t> types(L, kStartType);
  for (std::size_t i = 1; i < L; ++i) types[i] = io::index_of(seq.index_map[i - 1].modality);

  core::Tensor x = core::slice_rows(seq.tokens, 0, L);
  x = core::add(x, core::embedding_lookup(positions_, pos));
  x = core::add(x, core::embedding_lookup(chain_type_, types));

  for (const Layer& layer : layers_) {
    x = core::add(x, attention(layer, core::layer_norm_last_axis(x, layer.ln1_gain, layer.ln1_bias)));
    const core::Tensor h = core::layer_norm_last_axis(x, layer.ln2_gain, layer.ln2_bias);
    x = core::add(x, layer.fc2(core::gelu(layer.fc1(h))));
  }

  AmtOutput out;
  out.recon = head_(core::layer_norm_last_axis(x, lnf_gain_, lnf_bias_));
  out.per_chain_recon = deinterleave(out.recon, seq);
  return out;
}

core::Tensor recon_loss(const AmtOutput& out, const InterleavedSequence& seq) {
  const std::size_t L = seq.length();
  if (!out.recon.defined() || out.recon.rows() != L || out.recon.cols() != seq.tokens.cols()) {
    throw ContractViolation("recon_loss: recon shape does not match sequence");
  }
  const core::Tensor targets = core::slice_rows(seq.tokens, 1, L);
  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < L; ++i) {
    if (seq.pad_mask[i]) real.push_back(i);
  }
  if (real.empty()) throw ContractViolation("recon_loss: every slot is padding");
  if (real.size() == L) return core::mse(out.recon, targets);
  return core::mse(core::embedding_lookup(out.recon, real), core::embedding_lookup(targets, real));
}

}  // namespace chainsurv::amt
