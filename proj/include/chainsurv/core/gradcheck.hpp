#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chainsurv/core/tensor.hpp"

namespace chainsurv::core {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  // Location of the worst coordinate.
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Per coordinate: |analytic - central| / (|analytic| + |central| + 1e-12),
// with central = (f(x+h) - f(x-h)) / 2h. Returns the maximum.
double relative_error(double analytic, double numeric);

// `point` must be a leaf with requires_grad; `f` rebuilds its graph from it on
// every call and returns a scalar.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor point, double step);

// Multi-tensor variant: perturbs every coordinate of every tensor in `params`.
// `analytic_hook`, when set, may edit the analytic gradients before they are
// compared (used to build negative controls).
GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<Tensor> params, double step,
                           const std::function<void(std::vector<std::vector<double>>&)>& analytic_hook = {});

}  // namespace chainsurv::core
