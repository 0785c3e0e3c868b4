#pragma once

#include "znn/activation.hpp"
#include "znn/core.hpp"
#include "znn/projection.hpp"

#include <cmath>
#include <variant>

namespace znn {

// =============================================================================
// Scale-parameter schedules
// =============================================================================

struct ConstantScale {
    double gamma = 1.0;
};

/// gamma * (t^p + 1)
struct PowerRampScale {
    double gamma = 1.0;
    double p = 2.0;
};

using ScaleSchedule = std::variant<ConstantScale, PowerRampScale>;

inline void validate(const ScaleSchedule& schedule) {
    std::visit(
        [](const auto& s) {
            if (!(s.gamma > 0.0)) throw InvalidSpec("scale schedule: gamma must be positive");
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PowerRampScale>) {
                if (!(s.p > 0.0)) throw InvalidSpec("power ramp: p must be positive");
            }
        },
        schedule);
}

[[nodiscard]] inline double scale_value(double t, const ScaleSchedule& schedule) {
    if (!(t >= 0.0)) throw InvalidInput("scale_value: t must be >= 0");
    return std::visit(
        [t](const auto& s) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PowerRampScale>)
                return s.gamma * (std::pow(t, s.p) + 1.0);
            else
                return s.gamma;
        },
        schedule);
}

// =============================================================================
// Evolution formulas
// =============================================================================

/// edot = -gamma Psi(e)
struct OZNN {
    double gamma = 1.0;
    ActivationSpec activation = Linear{};
};

/// edot = -mu(t) Psi(e)
struct VPZNN {
    ScaleSchedule schedule = PowerRampScale{};
    ActivationSpec activation = Linear{};
};

/// edot = -gamma e - beta * integral(e)
struct NTZNN {
    double gamma = 1.0;
    double beta = 1.0;
};

/// edot = -gamma Psi(a1 e + a2 e^(b/c)), b and c odd.
struct FTZNN {
    double gamma = 1.0;
    double a1 = 1.0;
    double a2 = 1.0;
    int b = 5;
    int c = 3;
    ActivationSpec activation = Linear{};
};

/// edot = -gamma Psi1(e) - beta Psi2(e + gamma * integral(Psi1(e)))
struct ActivatedNTZNN {
    double gamma = 1.0;
    double beta = 1.0;
    ActivationSpec psi1 = Linear{};
    ActivationSpec psi2 = Linear{};
};

/// edot = -gamma R(e), the nonconvex projection taking the activation slot.
struct NPZNN {
    double gamma = 1.0;
    ProjectionSet set = BoxSet{};
};

using EvolutionSpec = std::variant<OZNN, VPZNN, NTZNN, FTZNN, ActivatedNTZNN, NPZNN>;

/// True for formulas that carry an integral (auxiliary) state.
[[nodiscard]] inline bool has_integral_state(const EvolutionSpec& spec) {
    return std::holds_alternative<NTZNN>(spec) || std::holds_alternative<ActivatedNTZNN>(spec);
}

inline void validate(const EvolutionSpec& spec) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0)) throw InvalidSpec(std::string(what) + " must be positive");
    };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, OZNN>) {
                positive(s.gamma, "gamma");
                validate(s.activation);
            } else if constexpr (std::is_same_v<T, VPZNN>) {
                validate(s.schedule);
                validate(s.activation);
            } else if constexpr (std::is_same_v<T, NTZNN>) {
                positive(s.gamma, "gamma");
                positive(s.beta, "beta");
            } else if constexpr (std::is_same_v<T, FTZNN>) {
                positive(s.gamma, "gamma");
                positive(s.a1, "a1");
                positive(s.a2, "a2");
                if (s.b % 2 == 0 || s.c % 2 == 0) throw InvalidSpec("FTZNN: b and c must be odd");
                if (!(s.c > 0 && s.b >= s.c)) throw InvalidSpec("FTZNN: need b >= c > 0");
                validate(s.activation);
            } else if constexpr (std::is_same_v<T, ActivatedNTZNN>) {
                positive(s.gamma, "gamma");
                positive(s.beta, "beta");
                validate(s.psi1);
                validate(s.psi2);
            } else if constexpr (std::is_same_v<T, NPZNN>) {
                positive(s.gamma, "gamma");
                validate(s.set);
            }
        },
        spec);
}

struct EvolutionRate {
    Vector edot;    // prescribed error derivative
    Vector auxdot;  // derivative of the integral state (empty when none)
};

/// Right-hand side of the evolution formula. `aux` carries the running
/// integral for NTZNN / ActivatedNTZNN and must be empty otherwise.
[[nodiscard]] inline EvolutionRate evolution_rhs(const Vector& e, const Vector& aux, double t,
                                                 const EvolutionSpec& spec) {
    validate(spec);
    if (!e.allFinite()) throw InvalidInput("evolution_rhs: non-finite error");
    const bool integral = has_integral_state(spec);
    if (integral && aux.size() != e.size())
        throw InvalidInput("evolution_rhs: auxiliary state must match the error dimension");
    if (!integral && aux.size() != 0)
        throw InvalidInput("evolution_rhs: formula carries no auxiliary state");

    return std::visit(
        [&](const auto& s) -> EvolutionRate {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, OZNN>) {
                return {-s.gamma * activate(e, s.activation), Vector()};
            } else if constexpr (std::is_same_v<T, VPZNN>) {
                return {-scale_value(t, s.schedule) * activate(e, s.activation), Vector()};
            } else if constexpr (std::is_same_v<T, NTZNN>) {
                return {-s.gamma * e - s.beta * aux, e};
            } else if constexpr (std::is_same_v<T, FTZNN>) {
                const double power = static_cast<double>(s.b) / static_cast<double>(s.c);
                const Vector frac = e.unaryExpr([power](double u) {
                    const double m = std::pow(std::abs(u), power);
                    return u < 0.0 ? -m : (u > 0.0 ? m : 0.0);
                });
                return {-s.gamma * activate(Vector(s.a1 * e + s.a2 * frac), s.activation), Vector()};
            } else if constexpr (std::is_same_v<T, ActivatedNTZNN>) {
                const Vector p1 = activate(e, s.psi1);
                const Vector inner = e + s.gamma * aux;
                return {-s.gamma * p1 - s.beta * activate(inner, s.psi2), p1};
            } else {
                return {-s.gamma * nonconvex_project(e, s.set), Vector()};
            }
        },
        spec);
}

}  // namespace znn
