#pragma once

#include "lobcast/archive.hpp"
#include "lobcast/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lobcast {

// Named trainable tensors in registration order. Names are the checkpoint
// keys, e.g. "enc.0.attn.q.w".
class ParamStore {
public:
    // Registers `t` as trainable and returns it.
    Tensor add(std::string name, Tensor t);

    const Tensor& get(const std::string& name) const;
    const Tensor* find(const std::string& name) const;

    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::vector<Tensor> tensors() const;

    // Scalar count over names starting with `prefix` (all when empty).
    std::size_t count(const std::string& prefix = "") const;

    void zero_grad();

    void save(Archive& archive) const;
    // Copies values from the archive into the registered tensors; every
    // registered name must be present with a matching shape.
    void load(const Archive& archive);

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

}  // namespace lobcast
