#pragma once

// Synthetic problem instances with known smooth solutions. A trigonometric
// ground truth x*(t) is drawn first and the data operators are derived from it
// so that e(x*(t), t) vanishes identically.

#include "znn/core.hpp"
#include "znn/operator.hpp"
#include "znn/problem.hpp"

#include <algorithm>
#include <numbers>

namespace znn {

namespace detail {

struct TrigTerm {
    double offset;
    double amplitude;
    double frequency;
    double phase;
};

/// Matrix with entries offset + amplitude * sin(frequency * t + phase).
[[nodiscard]] inline TimeVaryingOperator trig_operator(Index rows, Index cols, std::vector<TrigTerm> terms) {
    auto shared = std::make_shared<const std::vector<TrigTerm>>(std::move(terms));
    TimeVaryingOperator op;
    op.rows = rows;
    op.cols = cols;
    op.value = [shared, rows, cols](double t) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) {
                const auto& e = (*shared)[static_cast<std::size_t>(j * rows + i)];
                m(i, j) = e.offset + e.amplitude * std::sin(e.frequency * t + e.phase);
            }
        return m;
    };
    op.derivative = [shared, rows, cols](double t) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) {
                const auto& e = (*shared)[static_cast<std::size_t>(j * rows + i)];
                m(i, j) = e.amplitude * e.frequency * std::cos(e.frequency * t + e.phase);
            }
        return m;
    };
    return op;
}

class SyntheticBuilder {
public:
    explicit SyntheticBuilder(std::uint64_t seed) : rng_(seed) {}

    /// Entries offset(i, j) + amp * U(-1, 1) * sin(w t + phi); symmetric mirrors the upper triangle.
    template <class OffsetFn>
    TimeVaryingOperator matrix(Index rows, Index cols, OffsetFn offset, double amp, bool symmetric = false) {
        std::vector<TrigTerm> terms(static_cast<std::size_t>(rows * cols));
        auto at = [&](Index i, Index j) -> TrigTerm& { return terms[static_cast<std::size_t>(j * rows + i)]; };
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) {
                if (symmetric && i > j) continue;
                at(i, j) = TrigTerm{offset(i, j), amp * rng_.uniform(-1.0, 1.0), rng_.uniform(0.5, 2.0),
                                    rng_.uniform(0.0, 2.0 * std::numbers::pi)};
            }
        if (symmetric)
            for (Index j = 0; j < cols; ++j)
                for (Index i = j + 1; i < rows; ++i) at(i, j) = at(j, i);
        return trig_operator(rows, cols, std::move(terms));
    }

    /// Smooth O(1) solution entries: c + sin(w t + phi), c in [-1, 1].
    TimeVaryingOperator solution(Index rows, Index cols) {
        return matrix(rows, cols, [this](Index, Index) { return rng_.uniform(-1.0, 1.0); }, 1.0);
    }

    /// Diagonally dominant: diagonal ~ diag_level, off-diagonal amplitude <= 0.5.
    TimeVaryingOperator dominant(Index n, double diag_level, bool symmetric) {
        return matrix(
            n, n, [diag_level](Index i, Index j) { return i == j ? diag_level : 0.0; }, 0.5, symmetric);
    }

    double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }

private:
    SplitMix rng_;
};

[[nodiscard]] inline std::function<Vector(double)> flatten(const TimeVaryingOperator& op) {
    return [f = op.value](double t) { return vec(f(t)); };
}

[[nodiscard]] inline TimeVaryingOperator identity_operator(Index n) {
    return constant_operator(Matrix(Matrix::Identity(n, n)));
}

[[nodiscard]] inline TimeVaryingOperator stack_rows(const TimeVaryingOperator& top, const TimeVaryingOperator& bottom) {
    TimeVaryingOperator out;
    out.rows = top.rows + bottom.rows;
    out.cols = top.cols;
    out.value = [a = top.value, b = bottom.value](double t) {
        const Matrix ta = a(t);
        const Matrix tb = b(t);
        Matrix m(ta.rows() + tb.rows(), ta.cols());
        m << ta, tb;
        return m;
    };
    if (top.has_derivative() && bottom.has_derivative()) {
        out.derivative = [a = top.derivative, b = bottom.derivative](double t) {
            const Matrix ta = a(t);
            const Matrix tb = b(t);
            Matrix m(ta.rows() + tb.rows(), ta.cols());
            m << ta, tb;
            return m;
        };
    }
    return out;
}

}  // namespace detail

/// Smooth instance of `kind` with a known solution; deterministic in seed.
/// `dim` is the vector length or, for matrix kinds, the side of the square unknown.
[[nodiscard]] inline ProblemInstance make_synthetic(ProblemKind kind, Index dim, std::uint64_t seed) {
    using namespace detail;
    if (dim < 1) throw InvalidInput("make_synthetic: dim must be >= 1");
    if (is_matrix_kind(kind) && dim < 2)
        throw InvalidInput("make_synthetic: matrix kinds need dim >= 2");

    const Index n = dim;
    const double level = static_cast<double>(n) + 1.0;
    SyntheticBuilder gen(mix64(seed) ^ (static_cast<std::uint64_t>(kind) * 0x632be59bd9b4e019ULL));
    std::map<std::string, TimeVaryingOperator> op;

    switch (kind) {
        case ProblemKind::LinearSystem:
        case ProblemKind::DQM: {
            const auto A = gen.dominant(n, level, kind == ProblemKind::DQM);
            const auto xs = gen.solution(n, 1);
            op["A"] = A;
            op["b"] = ops::mul(A, xs);
            return make_problem(kind, std::move(op), flatten(xs));
        }
        case ProblemKind::NonlinearStationarity: {
            const auto A = gen.dominant(n, level, true);
            const auto c = gen.matrix(n, 1, [](Index, Index) { return 0.3; }, 0.1);
            const auto xs = gen.solution(n, 1);
            const auto cube = ops::hadamard(xs, ops::hadamard(xs, xs));
            op["A"] = A;
            op["c"] = c;
            op["b"] = ops::add(ops::mul(A, xs), ops::hadamard(c, cube));
            return make_problem(kind, std::move(op), flatten(xs));
        }
        case ProblemKind::SteinEquation: {
            const double small = 0.3 / static_cast<double>(n);
            const auto A = gen.matrix(n, n, [](Index, Index) { return 0.0; }, small);
            const auto B = gen.matrix(n, n, [](Index, Index) { return 0.0; }, small);
            const auto Xs = gen.solution(n, n);
            op["A"] = A;
            op["B"] = B;
            op["C"] = ops::add(ops::mul(ops::mul(A, Xs), B), Xs);
            return make_problem(kind, std::move(op), flatten(Xs));
        }
        case ProblemKind::MatrixSquareRoot: {
            const auto Xs = gen.dominant(n, level, true);
            op["A"] = ops::mul(Xs, Xs);
            return make_problem(kind, std::move(op), flatten(Xs));
        }
        case ProblemKind::MatrixInversion: {
            const auto A = gen.dominant(n, level, false);
            op["A"] = A;
            auto truth = [f = A.value](double t) { return vec(Matrix(f(t).inverse())); };
            return make_problem(kind, std::move(op), truth);
        }
        case ProblemKind::EqualityQP: {
            const Index k = std::max<Index>(1, n / 2);
            const auto A = gen.dominant(n, level, true);
            const auto D = gen.matrix(k, n, [](Index i, Index j) { return i == j ? 2.0 : 0.0; }, 0.3);
            const auto xs = gen.solution(n, 1);
            const auto rho = gen.solution(k, 1);
            op["A"] = A;
            op["D"] = D;
            op["b"] = ops::add(ops::mul(A, xs), ops::mul(ops::transpose(D), rho));
            op["c"] = ops::mul(D, xs);
            return make_problem(kind, std::move(op), flatten(stack_rows(xs, rho)));
        }
        case ProblemKind::LinearEqAndIneq: {
            const Index q = std::max<Index>(1, n / 2);
            const auto A = gen.dominant(n, level, false);
            const auto C = gen.matrix(q, n, [&gen](Index, Index) { return gen.uniform(-1.0, 1.0); }, 0.3);
            const auto xs = gen.solution(n, 1);
            const auto ys = gen.matrix(q, 1, [](Index, Index) { return 1.5; }, 0.4);
            op["A"] = A;
            op["C"] = C;
            op["b"] = ops::mul(A, xs);
            op["d"] = ops::add(ops::mul(C, xs), ops::hadamard(ys, ys));
            return make_problem(kind, std::move(op), flatten(stack_rows(xs, ys)));
        }
        case ProblemKind::LyapunovEquation: {
            const auto A = gen.dominant(n, -level, false);
            const auto Xs = gen.solution(n, n);
            const auto At = ops::transpose(A);
            op["A"] = A;
            op["Q"] = ops::scale(ops::add(ops::mul(At, Xs), ops::mul(Xs, A)), -1.0);
            return make_problem(kind, std::move(op), flatten(Xs));
        }
        case ProblemKind::SylvesterEquation: {
            const auto A = gen.dominant(n, level + 1.0, false);
            const auto B = gen.dominant(n, -(level + 1.0), false);
            const auto Xs = gen.solution(n, n);
            op["A"] = A;
            op["B"] = B;
            op["C"] = ops::add(ops::mul(Xs, B), ops::mul(A, Xs), -1.0);
            return make_problem(kind, std::move(op), flatten(Xs));
        }
        case ProblemKind::YangBaxterLike: {
            // X* = A solves X A X = A X A.
            const auto A = gen.dominant(n, level, false);
            op["A"] = A;
            return make_problem(kind, std::move(op), flatten(A));
        }
    }
    throw InvalidInput("make_synthetic: unsupported kind");
}

/// x*(0) plus a deterministic perturbation of the given max-norm size.
[[nodiscard]] inline Vector perturbed_start(const ProblemInstance& p, double magnitude, std::uint64_t seed,
                                            double t0 = 0.0) {
    if (!p.ground_truth) throw InvalidInput("perturbed_start: problem has no ground truth");
    Vector x = p.ground_truth(t0);
    SplitMix rng(mix64(seed + 0x5151));
    for (Index i = 0; i < x.size(); ++i) x[i] += magnitude * rng.uniform(-1.0, 1.0);
    return x;
}

}  // namespace znn
