#include "lobcast/rng.hpp"

#include "lobcast/error.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

namespace lobcast {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::BadParams, "Rng::index(0)");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return static_cast<std::size_t>(draw % n);
}

std::string Rng::state() const {
    std::ostringstream out;
    out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    out.precision(17);
    out << std::hexfloat << spare_;
    return out.str();
}

void Rng::restore(const std::string& state) {
    std::istringstream in(state);
    int spare_flag = 0;
    std::string spare_text;
    in >> engine_ >> spare_flag >> spare_text;
    if (!in && !in.eof()) throw Error(ErrorKind::Format, "malformed RNG state");
    has_spare_ = spare_flag != 0;
    spare_ = std::strtod(spare_text.c_str(), nullptr);
}

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = rng.uniform(-bound, bound);
    return Tensor(std::move(shape), std::move(values), true);
}

}  // namespace lobcast
