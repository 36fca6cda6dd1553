#pragma once

#include "lobcast/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace lobcast {

// Seeded generator with platform-independent derived distributions
// (std::*_distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    std::string state() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Fisher-Yates with Rng::index.
template <typename Container>
void shuffle(Container& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.index(i);
        std::swap(items[i - 1], items[j]);
    }
}

// Parameter tensor drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

}  // namespace lobcast
