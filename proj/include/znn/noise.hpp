#pragma once

#include "znn/core.hpp"

#include <cmath>
#include <variant>

namespace znn {

// Additive disturbances. Models inject them into the prescribed error
// derivative (see perturb_model in model.hpp).

struct ConstantNoise {
    Vector value;  // length 1 broadcasts
};

/// slope * t
struct LinearNoise {
    Vector slope;  // length 1 broadcasts
};

/// Uniform in [-bound, bound], deterministic in (seed, step index) and held
/// constant within a step. Continuous-time integration derives the index as
/// floor(t / hold).
struct BoundedRandomNoise {
    double bound = 0.1;
    std::uint64_t seed = 0;
    double hold = 1e-3;
};

using NoiseSpec = std::variant<ConstantNoise, LinearNoise, BoundedRandomNoise>;

inline void validate(const NoiseSpec& spec) {
    std::visit(
        [](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ConstantNoise>) {
                if (n.value.size() == 0 || !n.value.allFinite()) throw InvalidSpec("constant noise needs finite values");
            } else if constexpr (std::is_same_v<T, LinearNoise>) {
                if (n.slope.size() == 0 || !n.slope.allFinite()) throw InvalidSpec("linear noise needs finite slopes");
            } else {
                if (!(n.bound > 0.0)) throw InvalidSpec("bounded random noise: bound must be positive");
                if (!(n.hold > 0.0)) throw InvalidSpec("bounded random noise: hold must be positive");
            }
        },
        spec);
}

/// Natural length of the noise vector; 1 means it broadcasts.
[[nodiscard]] inline Index noise_length(const NoiseSpec& spec) {
    if (const auto* c = std::get_if<ConstantNoise>(&spec)) return c->value.size();
    if (const auto* l = std::get_if<LinearNoise>(&spec)) return l->slope.size();
    return 1;
}

namespace detail {

[[nodiscard]] inline Vector broadcast(const Vector& v, Index dim) {
    if (v.size() == dim) return v;
    if (v.size() == 1) return Vector::Constant(dim, v[0]);
    throw InvalidInput("noise has length " + std::to_string(v.size()) + ", expected 1 or " +
                       std::to_string(dim));
}

}  // namespace detail

/// Noise sample of length `dim` at time t for the given step index.
[[nodiscard]] inline Vector sample_noise(const NoiseSpec& spec, double t, long step_index, Index dim = 1) {
    return std::visit(
        [&](const auto& n) -> Vector {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ConstantNoise>) {
                return detail::broadcast(n.value, dim);
            } else if constexpr (std::is_same_v<T, LinearNoise>) {
                return detail::broadcast(n.slope, dim) * t;
            } else {
                Vector out(dim);
                const std::uint64_t stream = mix64(n.seed) ^ mix64(static_cast<std::uint64_t>(step_index));
                for (Index i = 0; i < dim; ++i) {
                    const double u = unit_double(mix64(stream + static_cast<std::uint64_t>(i) * 0xd1b54a32d192ed03ULL));
                    out[i] = n.bound * (2.0 * u - 1.0);
                }
                return out;
            }
        },
        spec);
}

/// Step index used when no discrete index is supplied (continuous integration).
[[nodiscard]] inline long continuous_step_index(const NoiseSpec& spec, double t) {
    if (const auto* r = std::get_if<BoundedRandomNoise>(&spec))
        return static_cast<long>(std::floor(t / r->hold));
    return 0;
}

}  // namespace znn
