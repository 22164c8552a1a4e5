#include "chainsurv/core/tensor.hpp"

#include <atomic>
#include <sstream>
#include <unordered_set>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::core {

namespace {

std::atomic<bool> g_finite_checks{false};

detail::Node& require(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw ContractViolation("use of an undefined tensor");
  return *node;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty()) throw ContractViolation("tensor shape must have at least one axis");
  for (std::size_t extent : shape) {
    if (extent == 0) throw ContractViolation("tensor extents must be positive: " + shape_string(shape));
  }
  if (values.size() != shape_numel(shape)) {
    throw ContractViolation("tensor data length " + std::to_string(values.size()) +
                            " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return require(node_).shape; }

std::size_t Tensor::numel() const { return require(node_).value.size(); }

std::size_t Tensor::rows() const {
  const Shape& s = shape();
  return s.size() == 1 ? 1 : s.front();
}

std::size_t Tensor::cols() const { return shape().back(); }

std::span<const double> Tensor::data() const { return require(node_).value; }

double Tensor::item() const {
  if (numel() != 1) throw ContractViolation("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  const auto& n = require(node_);
  const std::size_t c = cols();
  if (row >= rows() || col >= c) throw ContractViolation("Tensor::at out of range");
  return n.value[row * c + col];
}

bool Tensor::requires_grad() const { return require(node_).requires_grad; }

bool Tensor::is_leaf() const { return require(node_).is_leaf; }

const std::string& Tensor::op() const { return require(node_).op; }

std::span<double> Tensor::mutable_data() {
  auto& n = require(node_);
  if (!n.is_leaf) throw ContractViolation("only leaf tensors may be mutated");
  return n.value;
}

bool Tensor::has_grad() const { return require(node_).grad_touched; }

std::span<const double> Tensor::grad() const {
  auto& n = require(node_);
  n.ensure_grad();
  return n.grad;
}

std::span<double> Tensor::mutable_grad() {
  auto& n = require(node_);
  n.ensure_grad();
  return n.grad;
}

void Tensor::zero_grad() {
  auto& n = require(node_);
  n.grad.assign(n.value.size(), 0.0);
  n.grad_touched = false;
}

void backward(const Tensor& loss) {
  auto root = loss.node();
  if (!root) throw ContractViolation("backward on undefined tensor");
  if (root->value.size() != 1) {
    throw ContractViolation("backward requires a scalar loss, got shape " + shape_string(root->shape));
  }
  if (!root->requires_grad) throw ContractViolation("backward: loss is not on the tape (no parameter inputs)");

  // Iterative post-order DFS; `order` ends up with parents before children.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* node : order) {
    if (!node->is_leaf) node->grad.assign(node->value.size(), 0.0);
    else node->ensure_grad();
  }
  root->grad[0] += 1.0;
  root->grad_touched = true;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward) node->backward(*node);
  }
  for (detail::Node* node : order) node->grad_touched = true;
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled, std::memory_order_relaxed); }

bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }

}  // namespace chainsurv::core
