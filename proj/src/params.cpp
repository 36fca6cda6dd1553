#include "lobcast/params.hpp"

#include "lobcast/error.hpp"

#include <algorithm>

namespace lobcast {

Tensor ParamStore::add(std::string name, Tensor t) {
    if (find(name)) throw Error(ErrorKind::BadParams, "parameter registered twice: " + name);
    t.set_requires_grad(true);
    items_.emplace_back(std::move(name), t);
    return t;
}

const Tensor* ParamStore::find(const std::string& name) const {
    for (const auto& [n, t] : items_) {
        if (n == name) return &t;
    }
    return nullptr;
}

const Tensor& ParamStore::get(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw Error(ErrorKind::Format, "no parameter named " + name);
    return *t;
}

std::vector<Tensor> ParamStore::tensors() const {
    std::vector<Tensor> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item.second);
    return out;
}

std::size_t ParamStore::count(const std::string& prefix) const {
    std::size_t total = 0;
    for (const auto& [n, t] : items_) {
        if (n.rfind(prefix, 0) == 0) total += t.size();
    }
    return total;
}

void ParamStore::zero_grad() {
    for (auto& item : items_) item.second.zero_grad();
}

void ParamStore::save(Archive& archive) const {
    for (const auto& [n, t] : items_) archive.add("param." + n, t);
}

void ParamStore::load(const Archive& archive) {
    for (auto& [n, t] : items_) {
        const auto* a = archive.find("param." + n);
        if (!a) throw Error(ErrorKind::Format, "checkpoint lacks parameter " + n);
        if (a->shape != t.shape()) {
            throw Error(ErrorKind::Format, "checkpoint parameter " + n + " has shape " + shape_str(a->shape) +
                                               ", model expects " + shape_str(t.shape()));
        }
        auto dst = t.mutable_values();
        std::copy(a->values.begin(), a->values.end(), dst.begin());
    }
}

}  // namespace lobcast
