#include "chainsurv/core/optim.hpp"

#include <cmath>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::core {

Tensor ParameterStore::create(const std::string& name, Shape shape, std::vector<double> init) {
  if (find(name) != nullptr) throw ContractViolation("duplicate parameter name: " + name);
  Tensor t = Tensor::from(std::move(shape), std::move(init), /*requires_grad=*/true);
  Parameter p;
  p.name = name;
  p.tensor = t;
  p.first_moment.assign(t.numel(), 0.0);
  p.second_moment.assign(t.numel(), 0.0);
  params_.push_back(std::move(p));
  return t;
}

Tensor ParameterStore::zeros(const std::string& name, Shape shape) {
  const std::size_t n = shape_numel(shape);
  return create(name, std::move(shape), std::vector<double>(n, 0.0));
}

Tensor ParameterStore::uniform_fan_in(const std::string& name, Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> init(shape_numel(shape));
  for (double& x : init) x = rng.uniform(-bound, bound);
  return create(name, std::move(shape), std::move(init));
}

Tensor ParameterStore::normal(const std::string& name, Shape shape, double stddev, Rng& rng) {
  std::vector<double> init(shape_numel(shape));
  for (double& x : init) x = stddev * rng.normal();
  return create(name, std::move(shape), std::move(init));
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const Parameter& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const Parameter& p : params_) out.push_back(p.name);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.tensor.numel();
  return n;
}

std::vector<Tensor> ParameterStore::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const Parameter& p : params_) out.push_back(p.tensor);
  return out;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) p.tensor.zero_grad();
}

namespace {

void step_one(Parameter& p, const AdamWOptions& o) {
  if (!p.tensor.has_grad()) throw ContractViolation("adamw_step: parameter '" + p.name + "' has no gradient");
  if (p.first_moment.size() != p.tensor.numel() || p.second_moment.size() != p.tensor.numel()) {
    throw ContractViolation("adamw_step: optimizer state shape mismatch for '" + p.name + "'");
  }
  ++p.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(p.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(p.step));
  auto w = p.tensor.mutable_data();
  auto g = p.tensor.grad();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] -= o.lr * o.weight_decay * w[i];
    p.first_moment[i] = o.beta1 * p.first_moment[i] + (1.0 - o.beta1) * g[i];
    p.second_moment[i] = o.beta2 * p.second_moment[i] + (1.0 - o.beta2) * g[i] * g[i];
    const double m_hat = p.first_moment[i] / bc1;
    const double v_hat = p.second_moment[i] / bc2;
    w[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

}  // namespace

void adamw_step(std::deque<Parameter>& params, const AdamWOptions& options) {
  for (Parameter& p : params) step_one(p, options);
}

void adamw_step(std::span<Parameter> params, const AdamWOptions& options) {
  for (Parameter& p : params) step_one(p, options);
}

}  // namespace chainsurv::core
