#include "chainsurv/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::core {

namespace {

using detail::Node;
using Backward = std::function<void(Node&)>;

[[noreturn]] void shape_error(const char* op, const std::string& what) {
  throw ContractViolation(std::string(op) + ": " + what);
}

void require_defined(const char* op, const Tensor& t) {
  if (!t.defined()) shape_error(op, "undefined input");
}

void require_matrix(const char* op, const Tensor& t) {
  require_defined(op, t);
  if (t.rank() != 2) shape_error(op, "expected a matrix, got " + shape_string(t.shape()));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  require_defined(op, a);
  require_defined(op, b);
  if (a.shape() != b.shape()) {
    shape_error(op, "shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

Tensor make_result(const char* op, Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                   Backward backward) {
  if (finite_checks_enabled()) {
    for (double v : value) {
      if (!std::isfinite(v)) throw NumericFault(std::string("non-finite output in op '") + op + "'");
    }
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  node->is_leaf = false;
  for (const Tensor& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(inputs.size());
    for (const Tensor& in : inputs) node->parents.push_back(in.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// Splits a shape into [outer, last].
std::pair<std::size_t, std::size_t> outer_last(const Shape& s) {
  const std::size_t last = s.back();
  return {shape_numel(s) / last, last};
}

bool is_row_vector(const Tensor& t, std::size_t n) {
  const Shape& s = t.shape();
  return (s.size() == 1 && s[0] == n) || (s.size() == 2 && s[0] == 1 && s[1] == n);
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Deriv deriv) {
  require_defined(op, a);
  auto in = a.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_result(op, a.shape(), std::move(out), {a}, [deriv](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
    }
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    shape_error("matmul", "inner dims differ " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* g = self.grad.data();
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb.value.data() + p * n;
          const double* grow = g + i * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = pa.value[i * k + p];
          double* gb = pb.grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gb[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined("add", a);
  require_defined("add", b);
  auto av = a.data();
  auto bv = b.data();
  if (a.shape() == b.shape()) {
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    return make_result("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
      for (auto& parent : self.parents) {
        if (!parent->requires_grad) continue;
        for (std::size_t i = 0; i < self.grad.size(); ++i) parent->grad[i] += self.grad[i];
      }
    });
  }
  const auto [outer, last] = outer_last(a.shape());
  if (!is_row_vector(b, last)) {
    shape_error("add", "cannot broadcast " + shape_string(b.shape()) + " onto " + shape_string(a.shape()));
  }
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < outer; ++r) {
    for (std::size_t c = 0; c < last; ++c) out[r * last + c] = av[r * last + c] + bv[c];
  }
  return make_result("add", a.shape(), std::move(out), {a, b}, [outer, last](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      for (std::size_t r = 0; r < outer; ++r) {
        for (std::size_t c = 0; c < last; ++c) pb.grad[c] += self.grad[r * last + c];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return make_result("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += self.grad[i];
      if (pb.requires_grad) pb.grad[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return make_result("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[i];
      if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  require_defined("scale", a);
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
  return make_result("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * factor;
  });
}

Tensor concat_last_axis(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_error("concat_last_axis", "no inputs");
  for (const Tensor& t : parts) require_defined("concat_last_axis", t);
  Shape lead(parts[0].shape().begin(), parts[0].shape().end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    const Shape& s = t.shape();
    if (s.size() != lead.size() + 1 || !std::equal(lead.begin(), lead.end(), s.begin())) {
      shape_error("concat_last_axis", "leading dims differ: " + shape_string(parts[0].shape()) + " vs " +
                                          shape_string(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  const std::size_t outer = shape_numel(parts[0].shape()) / widths[0];
  std::vector<double> out(outer * total);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto v = parts[p].data();
    for (std::size_t r = 0; r < outer; ++r) {
      std::copy_n(v.data() + r * widths[p], widths[p], out.data() + r * total + offset);
    }
    offset += widths[p];
  }
  Shape shape = lead;
  shape.push_back(total);
  return make_result("concat_last_axis", std::move(shape), std::move(out), parts,
                     [outer, total, widths](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t p = 0; p < widths.size(); ++p) {
                         Node& parent = *self.parents[p];
                         if (parent.requires_grad) {
                           for (std::size_t r = 0; r < outer; ++r) {
                             for (std::size_t c = 0; c < widths[p]; ++c) {
                               parent.grad[r * widths[p] + c] += self.grad[r * total + off + c];
                             }
                           }
                         }
                         off += widths[p];
                       }
                     });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_error("concat_rows", "no inputs");
  const std::size_t n = parts[0].defined() ? parts[0].cols() : 0;
  std::size_t total_rows = 0;
  std::vector<std::size_t> sizes;
  for (const Tensor& t : parts) {
    require_matrix("concat_rows", t);
    if (t.cols() != n) shape_error("concat_rows", "column counts differ");
    total_rows += t.rows();
    sizes.push_back(t.numel());
  }
  std::vector<double> out;
  out.reserve(total_rows * n);
  for (const Tensor& t : parts) {
    auto v = t.data();
    out.insert(out.end(), v.begin(), v.end());
  }
  return make_result("concat_rows", {total_rows, n}, std::move(out), parts, [sizes](Node& self) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      Node& parent = *self.parents[p];
      if (parent.requires_grad) {
        for (std::size_t i = 0; i < sizes[p]; ++i) parent.grad[i] += self.grad[off + i];
      }
      off += sizes[p];
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const std::size_t m = a.rows(), n = a.cols();
  auto v = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = v[i * n + j];
  }
  return make_result("transpose", {n, m}, std::move(out), {a}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) p.grad[i * n + j] += self.grad[j * m + i];
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t count) {
  require_matrix("slice_rows", a);
  if (count == 0 || start + count > a.rows()) shape_error("slice_rows", "range out of bounds");
  const std::size_t n = a.cols();
  auto v = a.data();
  std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(start * n),
                          v.begin() + static_cast<std::ptrdiff_t>((start + count) * n));
  return make_result("slice_rows", {count, n}, std::move(out), {a}, [start, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[start * n + i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count) {
  require_matrix("slice_cols", a);
  const std::size_t m = a.rows(), n = a.cols();
  if (count == 0 || start + count > n) shape_error("slice_cols", "range out of bounds");
  auto v = a.data();
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(v.data() + i * n + start, count, out.data() + i * count);
  return make_result("slice_cols", {m, count}, std::move(out), {a}, [m, n, start, count](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < count; ++j) p.grad[i * n + start + j] += self.grad[i * count + j];
    }
  });
}

Tensor relu(const Tensor& a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& a) {
  static constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  static constexpr double kA = 0.044715;
  return unary(
      "gelu", a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(kC * (x + kA * x * x * x))); },
      [](double x, double) {
        const double t = std::tanh(kC * (x + kA * x * x * x));
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kC * (1.0 + 3.0 * kA * x * x);
      });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor log_sigmoid(const Tensor& a) {
  return unary(
      "log_sigmoid", a, [](double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return stable_sigmoid(-x); });
}

Tensor softmax_rows(const Tensor& a, RowMask mask) {
  require_matrix("softmax_rows", a);
  const std::size_t m = a.rows(), n = a.cols();
  const bool causal = mask == RowMask::causal;
  if (causal && m != n) shape_error("softmax_rows", "causal mask needs a square input");
  auto v = a.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t width = causal ? i + 1 : n;
    const double* row = v.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      out[i * n + j] = std::exp(row[j] - mx);
      z += out[i * n + j];
    }
    for (std::size_t j = 0; j < width; ++j) out[i * n + j] /= z;
  }
  return make_result("softmax_rows", {m, n}, std::move(out), {a}, [m, n, causal](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t width = causal ? i + 1 : n;
      const double* y = self.value.data() + i * n;
      const double* g = self.grad.data() + i * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += y[j] * g[j];
      for (std::size_t j = 0; j < width; ++j) p.grad[i * n + j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor layer_norm_last_axis(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_defined("layer_norm_last_axis", x);
  const auto [outer, d] = outer_last(x.shape());
  if (gamma.defined() && !is_row_vector(gamma, d)) shape_error("layer_norm_last_axis", "gamma shape");
  if (beta.defined() && !is_row_vector(beta, d)) shape_error("layer_norm_last_axis", "beta shape");
  auto xv = x.data();
  std::vector<double> normalized(xv.size());
  std::vector<double> inv_std(outer);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < outer; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += row[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      const double nh = (row[c] - mu) * inv_std[r];
      normalized[r * d + c] = nh;
      double y = nh;
      if (gamma.defined()) y *= gamma.data()[c];
      if (beta.defined()) y += beta.data()[c];
      out[r * d + c] = y;
    }
  }
  std::vector<Tensor> inputs{x};
  const bool has_gamma = gamma.defined();
  const bool has_beta = beta.defined();
  if (has_gamma) inputs.push_back(gamma);
  if (has_beta) inputs.push_back(beta);
  return make_result(
      "layer_norm_last_axis", x.shape(), std::move(out), inputs,
      [outer, d, has_gamma, has_beta, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
        Node& px = *self.parents[0];
        Node* pg = has_gamma ? self.parents[1].get() : nullptr;
        Node* pb = has_beta ? self.parents[has_gamma ? 2 : 1].get() : nullptr;
        std::vector<double> dn(d);
        for (std::size_t r = 0; r < outer; ++r) {
          const double* g = self.grad.data() + r * d;
          const double* nh = normalized.data() + r * d;
          double mean_dn = 0.0, mean_dn_nh = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            dn[c] = g[c] * (pg ? pg->value[c] : 1.0);
            mean_dn += dn[c];
            mean_dn_nh += dn[c] * nh[c];
            if (pg && pg->requires_grad) pg->grad[c] += g[c] * nh[c];
            if (pb && pb->requires_grad) pb->grad[c] += g[c];
          }
          mean_dn /= static_cast<double>(d);
          mean_dn_nh /= static_cast<double>(d);
          if (px.requires_grad) {
            for (std::size_t c = 0; c < d; ++c) {
              px.grad[r * d + c] += inv_std[r] * (dn[c] - mean_dn - nh[c] * mean_dn_nh);
            }
          }
        }
      });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same_shape("mse", a, b);
  auto av = a.data();
  auto bv = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
  const double count = static_cast<double>(av.size());
  return make_result("mse", {1}, {acc / count}, {a, b}, [count](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double g = self.grad[0] * 2.0 / count;
    for (std::size_t i = 0; i < pa.value.size(); ++i) {
      const double diff = pa.value[i] - pb.value[i];
      if (pa.requires_grad) pa.grad[i] += g * diff;
      if (pb.requires_grad) pb.grad[i] -= g * diff;
    }
  });
}

Tensor mean_last_axis(const Tensor& a) {
  require_defined("mean_last_axis", a);
  const auto [outer, n] = outer_last(a.shape());
  auto v = a.data();
  std::vector<double> out(outer, 0.0);
  for (std::size_t r = 0; r < outer; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r] += v[r * n + c];
    out[r] /= static_cast<double>(n);
  }
  Shape shape = a.shape();
  shape.back() = 1;
  return make_result("mean_last_axis", std::move(shape), std::move(out), {a}, [outer, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < outer; ++r) {
      const double g = self.grad[r] / static_cast<double>(n);
      for (std::size_t c = 0; c < n; ++c) p.grad[r * n + c] += g;
    }
  });
}

Tensor mean_rows(const Tensor& a) {
  require_matrix("mean_rows", a);
  const std::size_t m = a.rows(), n = a.cols();
  auto v = a.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += v[i * n + j];
  }
  for (double& x : out) x /= static_cast<double>(m);
  return make_result("mean_rows", {1, n}, std::move(out), {a}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) p.grad[i * n + j] += self.grad[j] / static_cast<double>(m);
    }
  });
}

Tensor sum(const Tensor& a) {
  require_defined("sum", a);
  double acc = 0.0;
  for (double x : a.data()) acc += x;
  return make_result("sum", {1}, {acc}, {a}, [](Node& self) {
    Node& p = *self.parents[0];
    for (double& g : p.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  require_defined("mean", a);
  double acc = 0.0;
  for (double x : a.data()) acc += x;
  const double count = static_cast<double>(a.numel());
  return make_result("mean", {1}, {acc / count}, {a}, [count](Node& self) {
    Node& p = *self.parents[0];
    for (double& g : p.grad) g += self.grad[0] / count;
  });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<std::size_t>& indices) {
  require_matrix("embedding_lookup", table);
  if (indices.empty()) shape_error("embedding_lookup", "no indices");
  const std::size_t vocab = table.rows(), d = table.cols();
  auto v = table.data();
  std::vector<double> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= vocab) {
      shape_error("embedding_lookup", "index " + std::to_string(indices[i]) + " >= table rows " +
                                          std::to_string(vocab));
    }
    std::copy_n(v.data() + indices[i] * d, d, out.data() + i * d);
  }
  return make_result("embedding_lookup", {indices.size(), d}, std::move(out), {table},
                     [indices, d](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t i = 0; i < indices.size(); ++i) {
                         for (std::size_t c = 0; c < d; ++c) p.grad[indices[i] * d + c] += self.grad[i * d + c];
                       }
                     });
}

}  // namespace chainsurv::core
