#pragma once

// Discrete-time steppers. All of them honor the predict manner: x_{k+1} is
// produced from data sampled at or before t_k, except the textbook variants of
// EulerBackward and RK4, which read data at t_{k+1} and t_k + eta/2 unless
// Scheme::strict is set (strict mode extrapolates those samples linearly from
// t_k and t_{k-1}).

#include "znn/core.hpp"
#include "znn/model.hpp"
#include "znn/operator.hpp"
#include "znn/trajectory.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace znn {

enum class SchemeKind {
    EulerForward,   // xdot_k = (x_{k+1} - x_k) / eta
    EulerBackward,  // xdot_{k+1} = (x_{k+1} - x_k) / eta, model read at t_{k+1} with x_k
    ThreeStep,      // xdot_k = (2x_{k+1} - 3x_k + 2x_{k-1} - x_{k-2}) / (2 eta), differenced data
    TaylorZTD,      // same four-instant rule, declared data derivatives at t_k
    RK4,            // classical four-stage Runge-Kutta
};

inline constexpr std::array<SchemeKind, 5> kAllSchemes = {
    SchemeKind::EulerForward, SchemeKind::EulerBackward, SchemeKind::ThreeStep, SchemeKind::TaylorZTD,
    SchemeKind::RK4,
};

[[nodiscard]] constexpr std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::EulerForward: return "EulerForward";
        case SchemeKind::EulerBackward: return "EulerBackward";
        case SchemeKind::ThreeStep: return "ThreeStep";
        case SchemeKind::TaylorZTD: return "TaylorZTD";
        case SchemeKind::RK4: return "RK4";
    }
    return "?";
}

[[nodiscard]] inline std::optional<SchemeKind> scheme_from_string(std::string_view name) {
    for (auto k : kAllSchemes)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

struct Scheme {
    SchemeKind kind = SchemeKind::EulerForward;
    double gap = 1e-3;
    bool strict = false;
};

/// Number of states (x_k, x_{k-1}, ...) a scheme needs.
[[nodiscard]] constexpr std::size_t history_needed(SchemeKind kind) {
    return (kind == SchemeKind::ThreeStep || kind == SchemeKind::TaylorZTD) ? 3 : 1;
}

struct StatePoint {
    Vector x;
    Vector aux;
};

namespace detail {

template <class M>
[[nodiscard]] bool derivatives_declared(const M& m) {
    if constexpr (requires { m.problem.all_derivatives_declared(); })
        return m.problem.all_derivatives_declared();
    else if constexpr (requires { m.derivatives_declared(); })
        return m.derivatives_declared();
    else
        return false;
}

}  // namespace detail

/// Advances from t_k = k * gap to t_{k+1}. history[0] holds (x_k, aux_k),
/// history[1] the state at t_{k-1}, history[2] the state at t_{k-2}.
template <ZnnModel M>
[[nodiscard]] StatePoint step(const M& m, const Scheme& scheme, std::span<const StatePoint> history, long k) {
    if (!(scheme.gap > 0.0)) throw InvalidInput("step: gap must be positive");
    if (history.size() < history_needed(scheme.kind))
        throw NeedsWarmup(std::string(to_string(scheme.kind)) + " needs " +
                          std::to_string(history_needed(scheme.kind)) + " states of history");

    const double eta = scheme.gap;
    const double tk = static_cast<double>(k) * eta;
    const StatePoint& now = history[0];

    EvalContext ctx;
    ctx.gap = eta;
    ctx.step_index = k;
    ctx.anchor = tk;

    switch (scheme.kind) {
        case SchemeKind::EulerForward: {
            ctx.partial = TimePartial::Backward1;
            const auto r = m.rhs(now.x, now.aux, tk, ctx);
            return {now.x + eta * r.xdot, now.aux + eta * r.auxdot};
        }
        case SchemeKind::EulerBackward: {
            ctx.partial = TimePartial::Backward1;
            if (!scheme.strict) ctx.anchor.reset();
            const auto r = m.rhs(now.x, now.aux, tk + eta, ctx);
            return {now.x + eta * r.xdot, now.aux + eta * r.auxdot};
        }
        case SchemeKind::ThreeStep:
        case SchemeKind::TaylorZTD: {
            ctx.partial = (scheme.kind == SchemeKind::TaylorZTD && detail::derivatives_declared(m))
                              ? TimePartial::Analytic
                              : TimePartial::Backward2;
            const auto r = m.rhs(now.x, now.aux, tk, ctx);
            const StatePoint& km1 = history[1];
            const StatePoint& km2 = history[2];
            return {1.5 * now.x - km1.x + 0.5 * km2.x + eta * r.xdot,
                    1.5 * now.aux - km1.aux + 0.5 * km2.aux + eta * r.auxdot};
        }
        case SchemeKind::RK4: {
            if (scheme.strict) {
                ctx.partial = TimePartial::Backward1;
            } else {
                ctx.partial = TimePartial::Analytic;
                ctx.anchor.reset();
            }
            const auto f = [&](const Vector& x, const Vector& a, double t) { return m.rhs(x, a, t, ctx); };
            const auto k1 = f(now.x, now.aux, tk);
            const auto k2 = f(now.x + 0.5 * eta * k1.xdot, now.aux + 0.5 * eta * k1.auxdot, tk + 0.5 * eta);
            const auto k3 = f(now.x + 0.5 * eta * k2.xdot, now.aux + 0.5 * eta * k2.auxdot, tk + 0.5 * eta);
            const auto k4 = f(now.x + eta * k3.xdot, now.aux + eta * k3.auxdot, tk + eta);
            return {now.x + (eta / 6.0) * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot),
                    now.aux + (eta / 6.0) * (k1.auxdot + 2.0 * k2.auxdot + 2.0 * k3.auxdot + k4.auxdot)};
        }
    }
    throw InvalidInput("step: unknown scheme");
}

/// Runs n_steps of the scheme from x0 (aux starts at zero). Multi-step schemes
/// take EulerForward steps until enough history exists. Errors are rethrown
/// as StepFailure with the original exception nested.
template <ZnnModel M>
[[nodiscard]] Trajectory solve_discrete(const M& m, const Vector& x0, const Scheme& scheme, long n_steps) {
    if (n_steps < 1) throw InvalidInput("solve_discrete: n_steps must be >= 1");
    if (x0.size() != m.state_dim()) throw InvalidInput("solve_discrete: x0 has the wrong length");

    Trajectory traj;
    const auto record = [&](long k, const StatePoint& s) {
        const double t = static_cast<double>(k) * scheme.gap;
        traj.push(t, s.x, s.aux, m.residual_norm(s.x, t));
        if (m.has_noise()) traj.noise_log.push_back(m.noise_at(t, k));
    };

    std::vector<StatePoint> history;  // newest first
    history.push_back({x0, Vector::Zero(m.aux_dim())});
    record(0, history.front());

    const std::size_t needed = history_needed(scheme.kind);
    for (long k = 0; k < n_steps; ++k) {
        StatePoint next;
        try {
            if (history.size() < needed) {
                Scheme warmup = scheme;
                warmup.kind = SchemeKind::EulerForward;
                next = step(m, warmup, std::span<const StatePoint>(history), k);
            } else {
                next = step(m, scheme, std::span<const StatePoint>(history), k);
            }
            if (!next.x.allFinite()) throw NumericalError("state became non-finite");
        } catch (const StepFailure&) {
            throw;
        } catch (const std::exception& ex) {
            std::throw_with_nested(StepFailure(k, ex.what()));
        }
        history.insert(history.begin(), std::move(next));
        if (history.size() > 3) history.pop_back();
        record(k + 1, history.front());
    }
    return traj;
}

struct OrderSample {
    double gap = 0.0;
    double steady_residual = 0.0;
};

struct OrderOptions {
    double horizon = 10.0;
    /// Start state; defaults to the ground truth at t = 0 when available, else zero.
    std::optional<Vector> x0;
    bool strict = false;
};

/// Largest residual over the final 10% of samples.
[[nodiscard]] inline double steady_residual(const Trajectory& traj) {
    if (traj.empty()) throw InvalidInput("steady_residual: empty trajectory");
    const std::size_t n = traj.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double worst = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) worst = std::max(worst, traj.residual_norms[i]);
    return worst;
}

/// Steady-state residual of one scheme across halving sample gaps.
template <ZnnModel M>
[[nodiscard]] std::vector<OrderSample> empirical_order(const M& m, SchemeKind kind, std::span<const double> gaps,
                                                       const OrderOptions& options = {}) {
    if (gaps.size() < 3) throw InvalidInput("empirical_order: need at least 3 gaps");
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
        if (!(gaps[i] > 0.0) || std::abs(gaps[i + 1] / gaps[i] - 0.5) > 1e-9)
            throw InvalidInput("empirical_order: each gap must halve the previous one");

    Vector x0 = Vector::Zero(m.state_dim());
    if (options.x0) {
        x0 = *options.x0;
    } else if constexpr (requires { m.problem.ground_truth; }) {
        if (m.problem.ground_truth) x0 = m.problem.ground_truth(0.0);
    }

    std::vector<OrderSample> out;
    for (double gap : gaps) {
        const long steps = std::lround(options.horizon / gap);
        const auto traj = solve_discrete(m, x0, Scheme{kind, gap, options.strict}, std::max(1L, steps));
        out.push_back({gap, steady_residual(traj)});
    }
    return out;
}

}  // namespace znn
