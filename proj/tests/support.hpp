#pragma once

// Shared generators and oracles for the test suite.

#include "znn/znn.hpp"

#include <catch_amalgamated.hpp>

namespace znn::test {

inline Vector random_vector(SplitMix& rng, Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

inline Matrix random_matrix(SplitMix& rng, Index r, Index c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

/// Central-difference Jacobian of x -> f(x).
template <class F>
Matrix fd_jacobian(F&& f, const Vector& x, double h = 1e-6) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (Index j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
    const double scale = std::max(1.0, b.norm());
    return (a - b).norm() / scale;
}

/// Scalar time-invariant LinearSystem a x = b.
inline ProblemInstance scalar_linear(double a, double b) {
    return make_problem(ProblemKind::LinearSystem,
                        {{"A", constant_operator(Matrix::Constant(1, 1, a))},
                         {"b", constant_operator(Matrix::Constant(1, 1, b))}},
                        [a, b](double) { return Vector::Constant(1, b / a); });
}

inline ProblemInstance scalar_dqm(double a, double b) {
    return make_problem(ProblemKind::DQM,
                        {{"A", constant_operator(Matrix::Constant(1, 1, a))},
                         {"b", constant_operator(Matrix::Constant(1, 1, b))}},
                        [a, b](double) { return Vector::Constant(1, b / a); });
}

inline const std::vector<ActivationSpec>& all_activations() {
    static const std::vector<ActivationSpec> list = {Linear{}, PowerSigmoid{}, PowerSigmoid{5, 2.0},
                                                     SignBiPower{0.5}, SignBiPower{0.3}, Bounded{1.0},
                                                     Bounded{0.25}};
    return list;
}

}  // namespace znn::test
