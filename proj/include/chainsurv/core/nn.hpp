#pragma once

#include <string>

#include "chainsurv/core/optim.hpp"
#include "chainsurv/core/tensor.hpp"

namespace chainsurv::core {

// y = x W (+ b), W stored as [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;  // undefined when built without bias

  Tensor operator()(const Tensor& x) const;
  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }
};

// Weights U(-1/sqrt(in), 1/sqrt(in)); bias starts at zero.
Linear make_linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                   bool with_bias = true);

}  // namespace chainsurv::core
