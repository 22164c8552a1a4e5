#include "chainsurv/core/nn.hpp"

#include "chainsurv/core/ops.hpp"

namespace chainsurv::core {

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add(y, bias) : y;
}

Linear make_linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                   bool with_bias) {
  Linear layer;
  layer.weight = store.uniform_fan_in(name + ".w", {in, out}, in, rng);
  if (with_bias) layer.bias = store.zeros(name + ".b", {1, out});
  return layer;
}

}  // namespace chainsurv::core
