#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fracflow {

// mt19937_64 with hand-rolled mappings so streams are identical across
// standard libraries (distribution objects are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    double normal() {
        // Box-Muller, one value per draw pair; cached second value dropped
        // deliberately to keep the stream position easy to reason about.
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace fracflow
