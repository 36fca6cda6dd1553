#pragma once

#include "lobcast/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace lobcast {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

// Compares reverse-mode gradients of `build_loss` with central differences
// (f(x+eps) - f(x-eps)) / (2 eps) for every element of every tensor in
// `inputs`. Relative error uses max(1e-8, |analytic| + |numeric|) as the
// denominator. `build_loss` must construct a fresh graph on every call.
GradCheckResult grad_check(const std::function<Tensor()>& build_loss, std::span<Tensor> inputs,
                           double eps = 1e-6);

// Single-input form: f receives a leaf that requires grad.
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps = 1e-6);

}  // namespace lobcast
