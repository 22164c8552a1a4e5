#include "chainsurv/prompt/adapter.hpp"

#include <string>
#include <vector>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::prompt {

ModalityAdapter::ModalityAdapter(core::ParameterStore& store, io::Modality modality, std::size_t d,
                                 std::size_t d_text, core::Rng& rng)
    : modality_(modality), d_(d), d_text_(d_text) {
  const std::string prefix = "adapter." + std::string(to_string(modality));
  fc1_ = core::make_linear(store, prefix + ".fc1", d + d_text, d, rng);
  fc2_ = core::make_linear(store, prefix + ".fc2", d, d, rng);
}

core::Tensor ModalityAdapter::forward(const core::Tensor& raw, const TextEmbedding& guidance) const {
  if (raw.rank() != 2 || raw.cols() != d_) {
    throw ContractViolation("adapter " + std::string(to_string(modality_)) + ": expected tokens of dim " +
                            std::to_string(d_) + ", got " + core::shape_string(raw.shape()));
  }
  if (guidance.dim() != d_text_) {
    throw ContractViolation("adapter " + std::string(to_string(modality_)) + ": guidance dim " +
                            std::to_string(guidance.dim()) + " != " + std::to_string(d_text_));
  }
  const core::Tensor text = core::Tensor::from({1, d_text_}, guidance.vector);
  const core::Tensor broadcast = core::embedding_lookup(text, std::vector<std::size_t>(raw.rows(), 0));
  const core::Tensor joined = core::concat_last_axis({raw, broadcast});
  return fc2_(core::relu(fc1_(joined)));
}

ChainProjection::ChainProjection(core::ParameterStore& store, io::Modality modality, std::size_t d, core::Rng& rng)
    : proj_(core::make_linear(store, "projection." + std::string(to_string(modality)), d, d, rng)) {}

core::Tensor ChainProjection::forward(const core::Tensor& raw) const { return proj_(raw); }

}  // namespace chainsurv::prompt
