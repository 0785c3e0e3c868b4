#pragma once

// Assembly of the implicit model M(edot, e, t) into an explicit ODE for x:
//   J(x, t) xdot = F(e, aux, t) [+ n(t)] - de/dt
// where F is the evolution formula and n an optional additive disturbance.

#include "znn/core.hpp"
#include "znn/evolution.hpp"
#include "znn/noise.hpp"
#include "znn/operator.hpp"
#include "znn/problem.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <limits>
#include <optional>

namespace znn {

inline constexpr double kRidgeEpsilon = 1e-10;
/// Condition estimate above which the LU path gives way to ridge least squares.
inline constexpr double kRidgeCondition = 1e8;
/// Condition estimate above which the Jacobian is treated as singular.
inline constexpr double kSingularCondition = 1e12;

enum class SolvePath { LU, RidgeLeastSquares };

struct LinearSolve {
    Vector solution;
    double condition = 1.0;
    SolvePath path = SolvePath::LU;
};

/// Solves J v = r. Square, well-conditioned systems use LU with partial
/// pivoting; near-singular or rectangular ones use ridge least squares.
[[nodiscard]] inline LinearSolve solve_jacobian(const Matrix& J, const Vector& r, double t) {
    if (J.rows() != r.size()) throw InvalidInput("solve_jacobian: dimension mismatch");
    if (!J.allFinite() || !r.allFinite()) throw InvalidInput("solve_jacobian: non-finite input");

    LinearSolve out;
    if (J.rows() == J.cols()) {
        Eigen::PartialPivLU<Matrix> lu(J);
        const double rc = lu.rcond();
        out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
        if (!(out.condition <= kSingularCondition)) throw SingularJacobian(t, out.condition);
        if (out.condition <= kRidgeCondition) {
            out.solution = lu.solve(r);
            out.path = SolvePath::LU;
            return out;
        }
    } else {
        Eigen::JacobiSVD<Matrix> svd(J);
        const auto& s = svd.singularValues();
        const double smin = s[s.size() - 1];
        out.condition = smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
        if (!(out.condition <= kSingularCondition)) throw SingularJacobian(t, out.condition);
    }

    out.path = SolvePath::RidgeLeastSquares;
    if (J.rows() >= J.cols()) {
        Matrix normal = J.transpose() * J;
        normal.diagonal().array() += kRidgeEpsilon;
        out.solution = normal.ldlt().solve(J.transpose() * r);
    } else {
        Matrix gram = J * J.transpose();
        gram.diagonal().array() += kRidgeEpsilon;
        out.solution = J.transpose() * gram.ldlt().solve(r);
    }
    return out;
}

struct ModelRate {
    Vector xdot;
    Vector auxdot;
};

/// A problem paired with an evolution formula (and optional disturbance).
struct AssembledModel {
    ProblemInstance problem;
    EvolutionSpec evolution;
    std::optional<NoiseSpec> noise;

    [[nodiscard]] Index state_dim() const { return problem.state_dim; }
    [[nodiscard]] Index error_dim() const { return problem.error_dim; }
    [[nodiscard]] Index aux_dim() const { return has_integral_state(evolution) ? problem.error_dim : 0; }
    [[nodiscard]] bool has_noise() const { return noise.has_value(); }

    [[nodiscard]] Vector noise_at(double t, long step_index) const {
        if (!noise) return Vector::Zero(error_dim());
        const long index = step_index >= 0 ? step_index : continuous_step_index(*noise, t);
        return sample_noise(*noise, t, index, error_dim());
    }

    [[nodiscard]] ModelRate rhs(const Vector& x, const Vector& aux, double t, const EvalContext& ctx = {}) const {
        const Vector e = eval_error(problem, x, t, ctx);
        auto [target, auxdot] = evolution_rhs(e, aux, t, evolution);
        if (noise) target += noise_at(t, ctx.step_index);
        const Matrix J = eval_jacobian(problem, x, t, ctx);
        const Vector et = eval_time_partial(problem, x, t, ctx);
        return {solve_jacobian(J, target - et, t).solution, std::move(auxdot)};
    }

    [[nodiscard]] double residual_norm(const Vector& x, double t) const {
        return eval_error(problem, x, t).norm();
    }
};

[[nodiscard]] inline AssembledModel assemble(ProblemInstance problem, EvolutionSpec evolution) {
    validate(evolution);
    return AssembledModel{std::move(problem), std::move(evolution), std::nullopt};
}

/// (xdot, auxdot) of the assembled model at (x, aux, t).
[[nodiscard]] inline ModelRate model_rhs(const AssembledModel& m, const Vector& x, const Vector& aux, double t,
                                         const EvalContext& ctx = {}) {
    return m.rhs(x, aux, t, ctx);
}

/// Model whose prescribed error derivative is F(e) + n(t).
[[nodiscard]] inline AssembledModel perturb_model(const AssembledModel& m, const NoiseSpec& spec) {
    validate(spec);
    const Index len = noise_length(spec);
    if (len != 1 && len != m.error_dim())
        throw InvalidInput("perturb_model: noise length " + std::to_string(len) +
                           " does not match error dimension " + std::to_string(m.error_dim()));
    AssembledModel out = m;
    out.noise = spec;
    return out;
}

}  // namespace znn
