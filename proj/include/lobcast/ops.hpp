#pragma once

#include "lobcast/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lobcast {

// Elementwise binary ops broadcast with numpy rules.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sin(const Tensor& x);
// Subgradient at exactly 0 is 0.
Tensor relu(const Tensor& x);

// (..., m, k) x (..., k, n) -> (..., m, n); batch extents broadcast from 1
// or from a missing leading axis.
Tensor matmul(const Tensor& a, const Tensor& b);

// Max-subtracted softmax along one axis.
Tensor softmax(const Tensor& x, std::size_t axis);

// Reductions drop the reduced axis.
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b);
// Swaps the last two axes.
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

// Rows of `table` (first axis) selected by index; backward scatter-adds.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);
// Columns (last axis) selected by index; backward scatter-adds.
Tensor gather_cols(const Tensor& x, std::span<const std::size_t> indices);

// Cumulative product down the first axis of a matrix.
Tensor cumprod_rows(const Tensor& x);

// Normalizes over the last axis, then applies per-feature gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// x (..., in) * w (in, out) + b (out)
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

}  // namespace lobcast
