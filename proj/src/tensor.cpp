#include "lobcast/tensor.hpp"

#include "lobcast/error.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace lobcast {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ", ";
        out << shape[i];
    }
    out << ')';
    return out.str();
}

namespace detail {

void Node::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

std::uint64_t next_node_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace detail

Tensor::Tensor() : Tensor(Shape{}, std::vector<double>{0.0}) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
    for (auto extent : shape) {
        if (extent == 0) throw Error(ErrorKind::ShapeMismatch, "zero extent in shape " + shape_str(shape));
    }
    if (shape_size(shape) != values.size()) {
        throw Error(ErrorKind::ShapeMismatch, "shape " + shape_str(shape) + " does not hold " +
                                                  std::to_string(values.size()) + " values");
    }
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->id = detail::next_node_id();
    set_requires_grad(requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows, bool requires_grad) {
    if (rows.size() == 0) throw Error(ErrorKind::ShapeMismatch, "from_rows needs at least one row");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) throw Error(ErrorKind::ShapeMismatch, "ragged rows");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Tensor(Shape{rows.size(), cols}, std::move(values), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
    const auto n = values.size();
    return Tensor(Shape{n}, std::move(values), requires_grad);
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape()));
    }
    return node_->shape[axis];
}

double Tensor::item() const {
    if (size() != 1) throw Error(ErrorKind::ShapeMismatch, "item() on tensor of shape " + shape_str(shape()));
    return node_->values[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
    if (index.size() != rank()) throw Error(ErrorKind::IndexOutOfRange, "index rank mismatch");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= node_->shape[axis]) throw Error(ErrorKind::IndexOutOfRange, "index out of range");
        flat = flat * node_->shape[axis] + i;
        ++axis;
    }
    return node_->values[flat];
}

void Tensor::set_requires_grad(bool flag) {
    node_->requires_grad = flag;
    if (flag) {
        node_->ensure_grad();
    } else if (!node_->backward) {
        node_->grad.clear();
    }
}

void Tensor::zero_grad() {
    if (node_->requires_grad) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->values, false); }

void backward(const Tensor& loss) {
    auto& root = loss.node();
    if (root->consumed) throw Error(ErrorKind::DoubleBackward, "backward already ran on this graph");
    if (root->values.size() != 1) {
        throw Error(ErrorKind::NonScalarLoss, "loss has shape " + shape_str(root->shape));
    }
    root->consumed = true;
    if (!root->backward) return;

    std::vector<std::shared_ptr<detail::Node>> order;
    std::vector<std::shared_ptr<detail::Node>> stack{root};
    std::unordered_set<std::uint64_t> seen;
    while (!stack.empty()) {
        auto node = stack.back();
        stack.pop_back();
        if (!seen.insert(node->id).second) continue;
        order.push_back(node);
        for (auto& input : node->inputs) {
            if (input->backward && input->requires_grad) stack.push_back(input);
        }
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a->id > b->id; });

    root->ensure_grad();
    root->grad[0] = 1.0;
    for (auto& node : order) {
        for (auto& input : node->inputs) {
            if (input->requires_grad) input->ensure_grad();
        }
        node->backward(*node);
    }
    // Interior nodes become constants; leaves keep their accumulated grads.
    for (auto& node : order) {
        node->backward = nullptr;
        node->inputs.clear();
        node->grad.clear();
        node->grad.shrink_to_fit();
        node->requires_grad = false;
    }
}

std::size_t parameter_count(std::span<const Tensor> params) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.size();
    return total;
}

}  // namespace lobcast
