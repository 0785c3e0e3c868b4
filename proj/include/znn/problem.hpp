#pragma once

// Time-varying problem zoo. Every problem is reduced to an error map e(x, t)
// over a flattened unknown x; matrix-valued unknowns are stored column-major.

#include "znn/core.hpp"
#include "znn/operator.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace znn {

enum class ProblemKind {
    LinearSystem,           // A x - b
    SteinEquation,          // A X B + X - C
    NonlinearStationarity,  // grad f = A x + c .* x^3 - b
    MatrixSquareRoot,       // X^2 - A
    MatrixInversion,        // A X - I
    EqualityQP,             // [A D'; D 0][x; rho] - [b; c]
    LinearEqAndIneq,        // [A x - b; C x + y .* y - d]
    LyapunovEquation,       // A' X + X A + Q
    SylvesterEquation,      // A X - X B + C
    YangBaxterLike,         // X A X - A X A
    DQM,                    // A x - b with A symmetric positive-definite
};

inline constexpr std::array<ProblemKind, 11> kAllProblemKinds = {
    ProblemKind::LinearSystem,      ProblemKind::SteinEquation,     ProblemKind::NonlinearStationarity,
    ProblemKind::MatrixSquareRoot,  ProblemKind::MatrixInversion,   ProblemKind::EqualityQP,
    ProblemKind::LinearEqAndIneq,   ProblemKind::LyapunovEquation,  ProblemKind::SylvesterEquation,
    ProblemKind::YangBaxterLike,    ProblemKind::DQM,
};

[[nodiscard]] constexpr std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::LinearSystem: return "LinearSystem";
        case ProblemKind::SteinEquation: return "SteinEquation";
        case ProblemKind::NonlinearStationarity: return "NonlinearStationarity";
        case ProblemKind::MatrixSquareRoot: return "MatrixSquareRoot";
        case ProblemKind::MatrixInversion: return "MatrixInversion";
        case ProblemKind::EqualityQP: return "EqualityQP";
        case ProblemKind::LinearEqAndIneq: return "LinearEqAndIneq";
        case ProblemKind::LyapunovEquation: return "LyapunovEquation";
        case ProblemKind::SylvesterEquation: return "SylvesterEquation";
        case ProblemKind::YangBaxterLike: return "YangBaxterLike";
        case ProblemKind::DQM: return "DQM";
    }
    return "?";
}

[[nodiscard]] inline std::optional<ProblemKind> problem_kind_from_string(std::string_view name) {
    for (auto k : kAllProblemKinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

/// Operator names each kind expects, in canonical order.
[[nodiscard]] inline std::vector<std::string> operator_names(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::LinearSystem:
        case ProblemKind::DQM: return {"A", "b"};
        case ProblemKind::SteinEquation: return {"A", "B", "C"};
        case ProblemKind::NonlinearStationarity: return {"A", "b", "c"};
        case ProblemKind::MatrixSquareRoot:
        case ProblemKind::MatrixInversion:
        case ProblemKind::YangBaxterLike: return {"A"};
        case ProblemKind::EqualityQP: return {"A", "b", "D", "c"};
        case ProblemKind::LinearEqAndIneq: return {"A", "b", "C", "d"};
        case ProblemKind::LyapunovEquation: return {"A", "Q"};
        case ProblemKind::SylvesterEquation: return {"A", "B", "C"};
    }
    return {};
}

[[nodiscard]] constexpr bool is_matrix_kind(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::SteinEquation:
        case ProblemKind::MatrixSquareRoot:
        case ProblemKind::MatrixInversion:
        case ProblemKind::LyapunovEquation:
        case ProblemKind::SylvesterEquation:
        case ProblemKind::YangBaxterLike: return true;
        default: return false;
    }
}

struct ProblemInstance {
    ProblemKind kind = ProblemKind::LinearSystem;
    std::map<std::string, TimeVaryingOperator> operators;
    Index state_dim = 0;
    Index error_dim = 0;
    /// Known solution x*(t), flattened; empty when unknown.
    std::function<Vector(double)> ground_truth;

    [[nodiscard]] const TimeVaryingOperator& op(const std::string& name) const {
        auto it = operators.find(name);
        if (it == operators.end()) throw InvalidInput("problem has no operator '" + name + "'");
        return it->second;
    }

    /// Side length of the square matrix unknown for matrix kinds.
    [[nodiscard]] Index matrix_side() const { return op("A").rows; }

    /// Matrix view of a flattened matrix-kind state.
    [[nodiscard]] Matrix state_matrix(const Vector& x) const {
        require(is_matrix_kind(kind), "state_matrix: not a matrix kind");
        return unvec(x, matrix_side(), matrix_side());
    }

    [[nodiscard]] bool all_derivatives_declared() const {
        for (const auto& [name, op] : operators)
            if (!op.has_derivative()) return false;
        return true;
    }
};

/// Checks operator shapes for the kind and fills state_dim / error_dim.
inline ProblemInstance make_problem(ProblemKind kind, std::map<std::string, TimeVaryingOperator> operators,
                                    std::function<Vector(double)> ground_truth = {}) {
    for (const auto& name : operator_names(kind))
        if (!operators.contains(name))
            throw InvalidInput(std::string(to_string(kind)) + ": missing operator '" + name + "'");
    for (const auto& [name, op] : operators)
        if (!op.value) throw InvalidInput("operator '" + name + "' has no value function");

    ProblemInstance p;
    p.kind = kind;
    p.operators = std::move(operators);
    p.ground_truth = std::move(ground_truth);

    auto shape = [&](const std::string& name, Index r, Index c) {
        const auto& o = p.op(name);
        if (o.rows != r || o.cols != c)
            throw InvalidInput(std::string(to_string(kind)) + ": operator '" + name + "' must be " +
                               std::to_string(r) + "x" + std::to_string(c));
    };
    const auto& a = p.op("A");
    const Index n = a.cols;
    const Index m = a.rows;
    if (n < 1 || m < 1) throw InvalidInput("operator A must be non-empty");

    switch (kind) {
        case ProblemKind::LinearSystem:
            shape("b", m, 1);
            p.state_dim = n;
            p.error_dim = m;
            break;
        case ProblemKind::DQM:
        case ProblemKind::NonlinearStationarity:
            shape("A", n, n);
            shape("b", n, 1);
            if (kind == ProblemKind::NonlinearStationarity) shape("c", n, 1);
            p.state_dim = p.error_dim = n;
            break;
        case ProblemKind::SteinEquation:
        case ProblemKind::SylvesterEquation:
            shape("A", n, n);
            shape("B", n, n);
            shape("C", n, n);
            p.state_dim = p.error_dim = n * n;
            break;
        case ProblemKind::MatrixSquareRoot:
        case ProblemKind::MatrixInversion:
        case ProblemKind::YangBaxterLike:
            shape("A", n, n);
            p.state_dim = p.error_dim = n * n;
            break;
        case ProblemKind::LyapunovEquation:
            shape("A", n, n);
            shape("Q", n, n);
            p.state_dim = p.error_dim = n * n;
            break;
        case ProblemKind::EqualityQP: {
            shape("A", n, n);
            shape("b", n, 1);
            const Index k = p.op("D").rows;
            shape("D", k, n);
            shape("c", k, 1);
            p.state_dim = p.error_dim = n + k;
            break;
        }
        case ProblemKind::LinearEqAndIneq: {
            shape("b", m, 1);
            const Index q = p.op("C").rows;
            shape("C", q, n);
            shape("d", q, 1);
            p.state_dim = n + q;
            p.error_dim = m + q;
            break;
        }
    }
    return p;
}

namespace detail {

inline void check_state(const ProblemInstance& p, const Vector& x) {
    if (x.size() != p.state_dim)
        throw InvalidInput("state has length " + std::to_string(x.size()) + ", expected " +
                           std::to_string(p.state_dim));
    if (!x.allFinite()) throw InvalidInput("state is not finite");
}

}  // namespace detail

/// Flattened error e(x, t).
[[nodiscard]] inline Vector eval_error(const ProblemInstance& p, const Vector& x, double t,
                                       const EvalContext& ctx = {}) {
    detail::check_state(p, x);
    auto S = [&](const char* name) { return sample(p.op(name), t, ctx); };
    switch (p.kind) {
        case ProblemKind::LinearSystem:
        case ProblemKind::DQM: return S("A") * x - S("b");
        case ProblemKind::NonlinearStationarity:
            return S("A") * x + Vector(S("c").col(0).cwiseProduct(x.array().cube().matrix())) - S("b");
        case ProblemKind::EqualityQP: {
            const Index n = p.op("A").rows;
            const Matrix D = S("D");
            const Vector xs = x.head(n);
            const Vector rho = x.tail(D.rows());
            Vector e(p.error_dim);
            e.head(n) = S("A") * xs + D.transpose() * rho - S("b");
            e.tail(D.rows()) = D * xs - S("c");
            return e;
        }
        case ProblemKind::LinearEqAndIneq: {
            const Matrix A = S("A");
            const Matrix C = S("C");
            const Vector xs = x.head(A.cols());
            const Vector y = x.tail(C.rows());
            Vector e(p.error_dim);
            e.head(A.rows()) = A * xs - S("b");
            e.tail(C.rows()) = C * xs + Vector(y.cwiseProduct(y)) - S("d");
            return e;
        }
        default: break;
    }
    const Matrix X = p.state_matrix(x);
    const Matrix A = S("A");
    switch (p.kind) {
        case ProblemKind::SteinEquation: return vec(Matrix(A * X * S("B") + X - S("C")));
        case ProblemKind::MatrixSquareRoot: return vec(Matrix(X * X - A));
        case ProblemKind::MatrixInversion:
            return vec(Matrix(A * X - Matrix::Identity(X.rows(), X.cols())));
        case ProblemKind::LyapunovEquation: return vec(Matrix(A.transpose() * X + X * A + S("Q")));
        case ProblemKind::SylvesterEquation: return vec(Matrix(A * X - X * S("B") + S("C")));
        case ProblemKind::YangBaxterLike: return vec(Matrix(X * A * X - A * X * A));
        default: break;
    }
    throw InvalidInput("eval_error: unsupported kind");
}

/// Analytic Jacobian de/dx.
[[nodiscard]] inline Matrix eval_jacobian(const ProblemInstance& p, const Vector& x, double t,
                                          const EvalContext& ctx = {}) {
    detail::check_state(p, x);
    auto S = [&](const char* name) { return sample(p.op(name), t, ctx); };
    switch (p.kind) {
        case ProblemKind::LinearSystem:
        case ProblemKind::DQM: return S("A");
        case ProblemKind::NonlinearStationarity: {
            Matrix J = S("A");
            const Vector c = S("c").col(0);
            J.diagonal() += 3.0 * c.cwiseProduct(x.cwiseProduct(x));
            return J;
        }
        case ProblemKind::EqualityQP: {
            const Matrix A = S("A");
            const Matrix D = S("D");
            const Index n = A.rows();
            const Index k = D.rows();
            Matrix J = Matrix::Zero(n + k, n + k);
            J.topLeftCorner(n, n) = A;
            J.topRightCorner(n, k) = D.transpose();
            J.bottomLeftCorner(k, n) = D;
            return J;
        }
        case ProblemKind::LinearEqAndIneq: {
            const Matrix A = S("A");
            const Matrix C = S("C");
            const Index n = A.cols();
            const Index q = C.rows();
            Matrix J = Matrix::Zero(p.error_dim, p.state_dim);
            J.topLeftCorner(A.rows(), n) = A;
            J.bottomLeftCorner(q, n) = C;
            J.bottomRightCorner(q, q) = (2.0 * x.tail(q)).asDiagonal();
            return J;
        }
        default: break;
    }
    const Matrix X = p.state_matrix(x);
    const Matrix A = S("A");
    const Matrix I = Matrix::Identity(X.rows(), X.cols());
    switch (p.kind) {
        case ProblemKind::SteinEquation:
            return kron(S("B").transpose(), A) + Matrix::Identity(p.state_dim, p.state_dim);
        case ProblemKind::MatrixSquareRoot: return kron(I, X) + kron(X.transpose(), I);
        case ProblemKind::MatrixInversion: return kron(I, A);
        case ProblemKind::LyapunovEquation: return kron(I, A.transpose()) + kron(A.transpose(), I);
        case ProblemKind::SylvesterEquation: return kron(I, A) - kron(S("B").transpose(), I);
        case ProblemKind::YangBaxterLike:
            return kron(Matrix((A * X).transpose()), I) + kron(I, Matrix(X * A)) - kron(A.transpose(), A);
        default: break;
    }
    throw InvalidInput("eval_jacobian: unsupported kind");
}

/// de/dt holding x fixed; operator derivatives per ctx.partial.
[[nodiscard]] inline Vector eval_time_partial(const ProblemInstance& p, const Vector& x, double t,
                                              const EvalContext& ctx = {}) {
    detail::check_state(p, x);
    auto S = [&](const char* name) { return sample(p.op(name), t, ctx); };
    auto dS = [&](const char* name) { return sample_derivative(p.op(name), t, ctx); };
    switch (p.kind) {
        case ProblemKind::LinearSystem:
        case ProblemKind::DQM: return dS("A") * x - dS("b");
        case ProblemKind::NonlinearStationarity:
            return dS("A") * x + Vector(dS("c").col(0).cwiseProduct(x.array().cube().matrix())) - dS("b");
        case ProblemKind::EqualityQP: {
            const Index n = p.op("A").rows;
            const Matrix dD = dS("D");
            const Vector xs = x.head(n);
            const Vector rho = x.tail(dD.rows());
            Vector e(p.error_dim);
            e.head(n) = dS("A") * xs + dD.transpose() * rho - dS("b");
            e.tail(dD.rows()) = dD * xs - dS("c");
            return e;
        }
        case ProblemKind::LinearEqAndIneq: {
            const Matrix dA = dS("A");
            const Matrix dC = dS("C");
            const Vector xs = x.head(dA.cols());
            Vector e(p.error_dim);
            e.head(dA.rows()) = dA * xs - dS("b");
            e.tail(dC.rows()) = dC * xs - dS("d");
            return e;
        }
        default: break;
    }
    const Matrix X = p.state_matrix(x);
    switch (p.kind) {
        case ProblemKind::SteinEquation:
            return vec(Matrix(dS("A") * X * S("B") + S("A") * X * dS("B") - dS("C")));
        case ProblemKind::MatrixSquareRoot: return vec(Matrix(-dS("A")));
        case ProblemKind::MatrixInversion: return vec(Matrix(dS("A") * X));
        case ProblemKind::LyapunovEquation: {
            const Matrix dA = dS("A");
            return vec(Matrix(dA.transpose() * X + X * dA + dS("Q")));
        }
        case ProblemKind::SylvesterEquation: return vec(Matrix(dS("A") * X - X * dS("B") + dS("C")));
        case ProblemKind::YangBaxterLike: {
            const Matrix A = S("A");
            const Matrix dA = dS("A");
            return vec(Matrix(X * dA * X - dA * X * A - A * X * dA));
        }
        default: break;
    }
    throw InvalidInput("eval_time_partial: unsupported kind");
}

/// Copy of the problem whose operators report every read to `log`.
[[nodiscard]] inline ProblemInstance instrument(const ProblemInstance& p, std::shared_ptr<SampleLog> log) {
    ProblemInstance out = p;
    for (auto& [name, op] : out.operators) op = instrument(op, log);
    return out;
}

}  // namespace znn
