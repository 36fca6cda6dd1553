#pragma once

// Dense float64 tensors with a dynamically recorded reverse-mode graph.
//
// Every operation whose inputs require gradients records a node holding its
// inputs and a backward closure. Node ids come from a monotonically
// increasing counter, so sorting reachable nodes by descending id visits the
// graph in reverse topological order. backward() frees the recorded graph;
// calling it a second time on the same loss raises DoubleBackward.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lobcast {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    bool consumed = false;
    std::uint64_t id = 0;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    // Reads this node's grad, accumulates into inputs that require grad.
    std::function<void(Node&)> backward;

    void ensure_grad();
};

std::uint64_t next_node_id();

}  // namespace detail

class Tensor {
public:
    Tensor();
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows,
                            bool requires_grad = false);
    static Tensor vector(std::vector<double> values, bool requires_grad = false);

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->values.size(); }
    std::size_t dim(std::size_t axis) const;

    std::span<const double> values() const { return node_->values; }
    // Mutable access is for leaves between graph constructions (optimizer
    // updates, finite-difference perturbation).
    std::span<double> mutable_values() { return node_->values; }
    double item() const;
    double at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);
    // Empty span when no gradient has been accumulated.
    std::span<const double> grad() const { return node_->grad; }
    std::span<double> mutable_grad() { return node_->grad; }
    void zero_grad();

    bool is_leaf() const { return !node_->backward; }
    std::uint64_t node_id() const { return node_->id; }
    const char* op_name() const { return node_->op; }

    // Same values, no graph history.
    Tensor detach() const;

    const std::shared_ptr<detail::Node>& node() const { return node_; }
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<detail::Node> node_;
};

// Runs reverse accumulation from a scalar loss. Leaves that require grad
// receive d(loss)/d(leaf) added to their grad buffers.
void backward(const Tensor& loss);

// Number of scalars across a parameter list.
std::size_t parameter_count(std::span<const Tensor> params);

}  // namespace lobcast
