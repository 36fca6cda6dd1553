#include "lobcast/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lobcast {

GradCheckResult grad_check(const std::function<Tensor()>& build_loss, std::span<Tensor> inputs, double eps) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    backward(build_loss());
    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

    GradCheckResult result;
    for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
        auto values = inputs[ti].mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + eps;
            const double up = build_loss().item();
            values[i] = original - eps;
            const double down = build_loss().item();
            values[i] = original;

            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[ti][i];
            const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            ++result.checked;
            if (rel > result.max_rel_error || result.checked == 1) {
                result.max_rel_error = std::max(rel, result.max_rel_error);
                result.worst_tensor = ti;
                result.worst_index = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
    Tensor inputs[] = {x};
    return grad_check([&] { return f(inputs[0]); }, inputs, eps);
}

}  // namespace lobcast
