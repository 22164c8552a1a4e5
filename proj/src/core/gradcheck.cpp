#include "chainsurv/core/gradcheck.hpp"

#include <cmath>
#include <string>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::core {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  Tensor out = f();
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericFault("grad_check: non-finite function value");
  return v;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-12);
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor point, double step) {
  std::vector<Tensor> params{point};
  return grad_check([&] { return f(point); }, params, step).max_relative_error;
}

GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<Tensor> params, double step,
                           const std::function<void(std::vector<std::vector<double>>&)>& analytic_hook) {
  if (!(step > 0.0)) throw ContractViolation("grad_check: step must be positive");
  for (Tensor& p : params) {
    if (!p.is_leaf() || !p.requires_grad()) throw ContractViolation("grad_check: points must be grad-tracking leaves");
    p.zero_grad();
  }

  Tensor loss = f();
  if (!std::isfinite(loss.item())) throw NumericFault("grad_check: non-finite function value");
  std::vector<std::vector<double>> analytic(params.size());
  if (loss.requires_grad()) {
    backward(loss);
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto g = params[t].grad();
    analytic[t].assign(g.begin(), g.end());
    for (double v : analytic[t]) {
      if (!std::isfinite(v)) throw NumericFault("grad_check: non-finite analytic gradient");
    }
  }
  if (analytic_hook) analytic_hook(analytic);

  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double plus = evaluate(f);
      values[i] = saved - step;
      const double minus = evaluate(f);
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double err = relative_error(analytic[t][i], numeric);
      ++report.coordinates;
      if (err > report.max_relative_error || report.coordinates == 1) {
        report.max_relative_error = err;
        report.worst_tensor = t;
        report.worst_index = i;
        report.worst_analytic = analytic[t][i];
        report.worst_numeric = numeric;
      }
    }
  }
  for (Tensor& p : params) p.zero_grad();
  return report;
}

}  // namespace chainsurv::core
