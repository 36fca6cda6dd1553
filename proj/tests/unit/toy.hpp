#pragma once

#include "lobcast/experiment.hpp"

#include <memory>

namespace lobcast::testing {

// Small synthetic experiment: one ticker, `levels` levels, short windows.
struct Toy {
    Dataset data;
    PreparedData prepared;
    Problem problem;
};

// Heap-allocated so the problem's pipeline pointer stays valid.
inline std::unique_ptr<Toy> make_toy(std::uint64_t seed, std::size_t rows, std::size_t levels, std::size_t context,
                    std::size_t target, std::size_t stride, TransformMode mode = TransformMode::Both) {
    auto toy = std::make_unique<Toy>();
    toy->data = synth_dataset(seed, rows, 1, levels);
    toy->prepared = prepare(toy->data, mode, context, target, stride);
    toy->problem.pipeline = &toy->prepared.pipeline;
    toy->problem.variables = toy->data.variables;
    return toy;
}

}  // namespace lobcast::testing
