#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "chainsurv/core/rng.hpp"
#include "chainsurv/core/tensor.hpp"

namespace chainsurv::core {

struct Parameter {
  std::string name;  // dotted path, e.g. "amt.layer0.attn.wq"
  Tensor tensor;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
};

// Owns every trainable tensor of a model. Storage is a deque so references
// handed out by create() stay valid as more parameters are added.
class ParameterStore {
 public:
  Tensor create(const std::string& name, Shape shape, std::vector<double> init);
  Tensor zeros(const std::string& name, Shape shape);
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  Tensor uniform_fan_in(const std::string& name, Shape shape, std::size_t fan_in, Rng& rng);
  Tensor normal(const std::string& name, Shape shape, double stddev, Rng& rng);

  std::deque<Parameter>& params() { return params_; }
  const std::deque<Parameter>& params() const { return params_; }
  const Parameter* find(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t scalar_count() const;
  std::vector<Tensor> tensors() const;

  void zero_grad();

 private:
  std::deque<Parameter> params_;
};

struct AdamWOptions {
  double lr = 1e-4;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (p -= lr*wd*p) followed by the bias-corrected Adam
// update. Grads are left as they are; the caller zeroes them.
void adamw_step(std::deque<Parameter>& params, const AdamWOptions& options);
void adamw_step(std::span<Parameter> params, const AdamWOptions& options);

}  // namespace chainsurv::core
