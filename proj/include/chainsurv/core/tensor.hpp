#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace chainsurv::core {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::string op = "leaf";
  bool requires_grad = false;
  bool is_leaf = true;
  // Set once backward has written into `grad` since the last zero_grad.
  bool grad_touched = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Dense row-major float64 tensor with reverse-mode differentiation.
//
// A Tensor is a shared handle: copies alias the same storage. Values are
// immutable after construction except for leaves, which the optimizer and
// the finite-difference checker update in place. Each op result records its
// parents and a backward closure; `backward(loss)` walks that graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const;
  std::size_t rank() const { return shape().size(); }
  // Extent of axis 0 / last axis for matrices.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  double item() const;
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  const std::string& op() const;

  // Leaf-only mutation (parameters, finite-difference probes).
  std::span<double> mutable_data();

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  std::shared_ptr<detail::Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from
// `loss`. Intermediate grads are reset on every call; leaf grads add up until
// zero_grad.
void backward(const Tensor& loss);

// NaN/Inf detection after every op. Off by default.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

}  // namespace chainsurv::core
