#pragma once

#include "znn/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

namespace znn {

// =============================================================================
// Activation functions
// =============================================================================
//
// Every activation is applied elementwise as sign(u) * shape(|u|), so oddness
// holds bit-for-bit and 0 maps to 0.

struct Linear {};

/// u^p outside [-1, 1], scaled bipolar sigmoid inside. p odd, xi > 0.
struct PowerSigmoid {
    int p = 3;
    double xi = 4.0;
};

/// 1/2 |u|^r sign(u) + 1/2 |u|^(1/r) sign(u), r in (0, 1).
struct SignBiPower {
    double r = 0.5;
};

/// Linear saturated at +-limit.
struct Bounded {
    double limit = 1.0;
};

using ActivationSpec = std::variant<Linear, PowerSigmoid, SignBiPower, Bounded>;

inline void validate(const ActivationSpec& spec) {
    std::visit(
        [](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, PowerSigmoid>) {
                if (a.p < 3 || a.p % 2 == 0)
                    throw InvalidSpec("PowerSigmoid: p must be an odd integer >= 3");
                if (!(a.xi > 0.0)) throw InvalidSpec("PowerSigmoid: xi must be positive");
            } else if constexpr (std::is_same_v<T, SignBiPower>) {
                if (!(a.r > 0.0 && a.r < 1.0)) throw InvalidSpec("SignBiPower: r must lie in (0, 1)");
            } else if constexpr (std::is_same_v<T, Bounded>) {
                if (!(a.limit > 0.0)) throw InvalidSpec("Bounded: limit must be positive");
            }
        },
        spec);
}

namespace detail {

// Shape on the nonnegative half-line; callers reattach the sign.
[[nodiscard]] inline double shape(const Linear&, double m) { return m; }

[[nodiscard]] inline double shape(const PowerSigmoid& a, double m) {
    if (m >= 1.0) return std::pow(m, a.p);
    return std::tanh(0.5 * a.xi * m) / std::tanh(0.5 * a.xi);
}

[[nodiscard]] inline double shape(const SignBiPower& a, double m) {
    return 0.5 * std::pow(m, a.r) + 0.5 * std::pow(m, 1.0 / a.r);
}

[[nodiscard]] inline double shape(const Bounded& a, double m) { return std::min(m, a.limit); }

}  // namespace detail

/// Scalar activation; no finiteness check.
[[nodiscard]] inline double activate_scalar(double u, const ActivationSpec& spec) {
    const double m = std::abs(u);
    const double s = std::visit([m](const auto& a) { return detail::shape(a, m); }, spec);
    return u < 0.0 ? -s : (u > 0.0 ? s : 0.0);
}

/// Activation of a nonnegative magnitude (used by the modulus-argument extension).
[[nodiscard]] inline double activate_magnitude(double m, const ActivationSpec& spec) {
    return std::visit([m](const auto& a) { return detail::shape(a, m); }, spec);
}

[[nodiscard]] inline Vector activate(const Vector& u, const ActivationSpec& spec) {
    if (!u.allFinite()) throw InvalidInput("activate: non-finite input");
    return u.unaryExpr([&spec](double x) { return activate_scalar(x, spec); });
}

// =============================================================================
// Complex-valued extensions
// =============================================================================

enum class ComplexActivationMethod {
    RealImag,          // Psi(G) + i Psi(H)
    ModulusArgument,   // Psi(|z|) * exp(i arg z)
};

/// Elementwise complex activation. Arguments are taken in (0, 2pi].
[[nodiscard]] inline ComplexMatrix activate_complex(const ComplexMatrix& z, const ActivationSpec& spec,
                                                    ComplexActivationMethod method) {
    if (!z.allFinite()) throw InvalidInput("activate_complex: non-finite input");
    ComplexMatrix out(z.rows(), z.cols());
    for (Index j = 0; j < z.cols(); ++j) {
        for (Index i = 0; i < z.rows(); ++i) {
            const Complex v = z(i, j);
            if (method == ComplexActivationMethod::RealImag) {
                out(i, j) = Complex(activate_scalar(v.real(), spec), activate_scalar(v.imag(), spec));
            } else {
                const double modulus = std::abs(v);
                if (modulus == 0.0) {
                    out(i, j) = Complex(0.0, 0.0);
                    continue;
                }
                double arg = std::arg(v);
                if (arg <= 0.0) arg += 2.0 * std::numbers::pi;
                out(i, j) = std::polar(activate_magnitude(modulus, spec), arg);
            }
        }
    }
    return out;
}

}  // namespace znn
