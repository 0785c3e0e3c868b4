#pragma once

// Complex-valued linear system A(t) z = b(t) driven by the complex activation
// extensions. The state is carried as the real vector [Re z; Im z] so the
// discrete steppers and the reference integrator apply unchanged.

#include "znn/activation.hpp"
#include "znn/core.hpp"
#include "znn/evolution.hpp"
#include "znn/model.hpp"
#include "znn/operator.hpp"
#include "znn/problem.hpp"
#include "znn/synthetic.hpp"

#include <Eigen/LU>
#include <limits>

namespace znn {

struct ComplexLinearModel {
    ComplexOperator A;
    ComplexOperator b;
    ScaleSchedule schedule = ConstantScale{1.0};
    ActivationSpec activation = Linear{};
    ComplexActivationMethod method = ComplexActivationMethod::RealImag;
    std::function<ComplexVector(double)> ground_truth;

    [[nodiscard]] Index n() const { return A.cols; }
    [[nodiscard]] Index state_dim() const { return 2 * A.cols; }
    [[nodiscard]] Index aux_dim() const { return 0; }
    [[nodiscard]] bool has_noise() const { return false; }
    [[nodiscard]] Vector noise_at(double, long) const { return Vector::Zero(2 * A.rows); }
    [[nodiscard]] bool derivatives_declared() const { return A.has_derivative() && b.has_derivative(); }

    [[nodiscard]] ComplexVector to_complex(const Vector& x) const {
        require(x.size() == state_dim(), "ComplexLinearModel: state has the wrong length");
        ComplexVector z(n());
        for (Index i = 0; i < n(); ++i) z[i] = Complex(x[i], x[n() + i]);
        return z;
    }

    [[nodiscard]] static Vector to_real(const ComplexVector& z) {
        Vector x(2 * z.size());
        x << z.real(), z.imag();
        return x;
    }

    [[nodiscard]] ComplexVector error(const Vector& x, double t, const EvalContext& ctx = {}) const {
        return sample(A, t, ctx) * to_complex(x) - ComplexVector(sample(b, t, ctx));
    }

    [[nodiscard]] ModelRate rhs(const Vector& x, const Vector& aux, double t, const EvalContext& ctx = {}) const {
        if (aux.size() != 0) throw InvalidInput("ComplexLinearModel: no auxiliary state");
        const ComplexVector z = to_complex(x);
        const ComplexMatrix At = sample(A, t, ctx);
        const ComplexVector e = At * z - ComplexVector(sample(b, t, ctx));
        const ComplexVector target =
            -scale_value(t < 0.0 ? 0.0 : t, schedule) * ComplexVector(activate_complex(e, activation, method));
        const ComplexVector et = sample_derivative(A, t, ctx) * z - ComplexVector(sample_derivative(b, t, ctx));

        Eigen::PartialPivLU<ComplexMatrix> lu(At);
        const double rc = lu.rcond();
        const double cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
        if (!(cond <= kSingularCondition)) throw SingularJacobian(t, cond);
        ComplexVector zdot;
        if (cond <= kRidgeCondition) {
            zdot = lu.solve(target - et);
        } else {
            ComplexMatrix normal = At.adjoint() * At;
            normal.diagonal().array() += kRidgeEpsilon;
            zdot = normal.ldlt().solve(At.adjoint() * (target - et));
        }
        return {to_real(zdot), Vector()};
    }

    [[nodiscard]] double residual_norm(const Vector& x, double t) const { return error(x, t).norm(); }
};

namespace detail {

[[nodiscard]] inline ComplexOperator complexify(const TimeVaryingOperator& re, const TimeVaryingOperator& im) {
    ComplexOperator out;
    out.rows = re.rows;
    out.cols = re.cols;
    out.value = [r = re.value, i = im.value](double t) {
        return ComplexMatrix(r(t).cast<Complex>() + Complex(0.0, 1.0) * i(t).cast<Complex>());
    };
    if (re.has_derivative() && im.has_derivative())
        out.derivative = [r = re.derivative, i = im.derivative](double t) {
            return ComplexMatrix(r(t).cast<Complex>() + Complex(0.0, 1.0) * i(t).cast<Complex>());
        };
    return out;
}

}  // namespace detail

/// Diagonally dominant complex A(t) with a smooth complex solution z*(t); b = A z*.
[[nodiscard]] inline ComplexLinearModel make_complex_synthetic(Index dim, std::uint64_t seed) {
    if (dim < 1) throw InvalidInput("make_complex_synthetic: dim must be >= 1");
    detail::SyntheticBuilder rng(seed ^ 0x636f6d706c6578ULL);
    const double diag = static_cast<double>(dim) + 1.0;
    const auto ar = rng.dominant(dim, diag, false);
    const auto ai = rng.matrix(dim, dim, [](Index, Index) { return 0.0; }, 0.5);
    const auto zr = rng.solution(dim, 1);
    const auto zi = rng.solution(dim, 1);

    ComplexLinearModel m;
    m.A = detail::complexify(ar, ai);
    const ComplexOperator z = detail::complexify(zr, zi);
    m.b = ops::mul(m.A, z);
    m.ground_truth = [f = z.value](double t) { return ComplexVector(f(t)); };
    return m;
}

/// Real 2n-dimensional LinearSystem [[Ar, -Ai], [Ai, Ar]] [zr; zi] = [br; bi].
/// Its elementwise activation coincides with the RealImag extension.
[[nodiscard]] inline ProblemInstance real_embedding(const ComplexLinearModel& m) {
    const Index n = m.A.rows;
    const Index c = m.A.cols;
    auto embed_matrix = [n, c](const ComplexMatrix& a) {
        Matrix out(2 * n, 2 * c);
        out << a.real(), -a.imag(), a.imag(), a.real();
        return out;
    };
    auto embed_vector = [](const ComplexMatrix& v) {
        Matrix out(2 * v.rows(), 1);
        out << v.real(), v.imag();
        return out;
    };
    TimeVaryingOperator A;
    A.rows = 2 * n;
    A.cols = 2 * c;
    A.value = [f = m.A.value, embed_matrix](double t) { return embed_matrix(f(t)); };
    if (m.A.has_derivative()) A.derivative = [f = m.A.derivative, embed_matrix](double t) { return embed_matrix(f(t)); };
    TimeVaryingOperator b;
    b.rows = 2 * m.b.rows;
    b.cols = 1;
    b.value = [f = m.b.value, embed_vector](double t) { return embed_vector(f(t)); };
    if (m.b.has_derivative()) b.derivative = [f = m.b.derivative, embed_vector](double t) { return embed_vector(f(t)); };

    std::function<Vector(double)> gt;
    if (m.ground_truth) gt = [f = m.ground_truth](double t) { return ComplexLinearModel::to_real(f(t)); };
    return make_problem(ProblemKind::LinearSystem, {{"A", std::move(A)}, {"b", std::move(b)}}, std::move(gt));
}

}  // namespace znn
