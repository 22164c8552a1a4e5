#pragma once

#include <cstddef>
#include <vector>

#include "chainsurv/core/tensor.hpp"

// Differentiable primitives. Every function here records itself on the tape
// when any input requires grad, and throws ContractViolation on shape
// mismatch. Matrix ops take rank-2 tensors; "last axis" ops view their input
// as [outer, last].
namespace chainsurv::core {

// a[m,k] x b[k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise sum. `b` may also be a single row ([n] or [1,n]) broadcast over
// every row of `a`, which is how biases are applied.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor concat_last_axis(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor transpose(const Tensor& a);
Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t count);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count);

Tensor relu(const Tensor& a);
// tanh approximation
Tensor gelu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// log(sigmoid(x)), finite for every finite x
Tensor log_sigmoid(const Tensor& a);

enum class RowMask { none, causal };

// Row-wise softmax. With RowMask::causal (square input), entry (i, j) for
// j > i is excluded and comes out as exactly 0.
Tensor softmax_rows(const Tensor& a, RowMask mask = RowMask::none);

// Normalizes over the last axis; gamma/beta ([d] or [1,d]) are optional.
Tensor layer_norm_last_axis(const Tensor& x, const Tensor& gamma = {}, const Tensor& beta = {},
                            double eps = 1e-5);

// mean((a - b)^2) over all elements -> scalar
Tensor mse(const Tensor& a, const Tensor& b);
// [outer, n] -> [outer, 1]
Tensor mean_last_axis(const Tensor& a);
// [m, n] -> [1, n]
Tensor mean_rows(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Row gather: table[V,d], indices -> [indices.size(), d]. Gradient scatters
// back additively, so repeated indices accumulate.
Tensor embedding_lookup(const Tensor& table, const std::vector<std::size_t>& indices);

}  // namespace chainsurv::core
