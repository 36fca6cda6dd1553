#pragma once

#include "lobcast/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lobcast {

// Row-major plain-data matrix for data handling outside the autodiff graph.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    // Rows [begin, end).
    Matrix slice_rows(std::size_t begin, std::size_t end) const;

    Tensor to_tensor(bool requires_grad = false) const;
    static Matrix from_tensor(const Tensor& t);

    bool operator==(const Matrix&) const = default;
};

}  // namespace lobcast
