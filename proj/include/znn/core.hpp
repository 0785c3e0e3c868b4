#pragma once

// Shared vocabulary for the znn library: Eigen aliases, the error hierarchy,
// and the vec/Kronecker helpers used to linearize matrix equations.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace znn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// =============================================================================
// Errors
// =============================================================================

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidSet : public Error {
public:
    using Error::Error;
};

/// Base for failures of the numerical machinery (as opposed to bad input).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public NumericalError {
public:
    SingularJacobian(double t, double condition)
        : NumericalError("singular Jacobian at t=" + std::to_string(t) +
                         " (condition estimate " + std::to_string(condition) + ")"),
          time_(t), condition_(condition) {}

    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double time_;
    double condition_;
};

class NeedsWarmup : public Error {
public:
    using Error::Error;
};

class StiffnessFailure : public NumericalError {
public:
    StiffnessFailure(double t, double h)
        : NumericalError("step size underflow at t=" + std::to_string(t) +
                         " (h=" + std::to_string(h) + ")"),
          time_(t), step_(h) {}

    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] double step_size() const noexcept { return step_; }

private:
    double time_;
    double step_;
};

/// Wraps an error raised while advancing a discrete trajectory.
class StepFailure : public NumericalError {
public:
    StepFailure(long step_index, const std::string& what)
        : NumericalError("step " + std::to_string(step_index) + ": " + what),
          step_index_(step_index) {}

    [[nodiscard]] long step_index() const noexcept { return step_index_; }

private:
    long step_index_;
};

class InsufficientObservers : public Error {
public:
    using Error::Error;
};

class DegenerateGeometry : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NothingToFit : public Error {
public:
    using Error::Error;
};

// =============================================================================
// Helpers
// =============================================================================

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidInput(message);
}

template <class Derived>
[[nodiscard]] bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

/// Kronecker product of two dense matrices.
template <class DA, class DB>
[[nodiscard]] auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    using Scalar = typename DA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-major vectorization.
template <class D>
[[nodiscard]] Eigen::Matrix<typename D::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<D>& m) {
    Eigen::Matrix<typename D::Scalar, Eigen::Dynamic, Eigen::Dynamic> copy = m;
    return Eigen::Map<const Eigen::Matrix<typename D::Scalar, Eigen::Dynamic, 1>>(copy.data(),
                                                                                 copy.size());
}

/// Inverse of vec for an n-by-n matrix stored column-major.
[[nodiscard]] inline Matrix unvec(const Vector& v, Index rows, Index cols) {
    require(v.size() == rows * cols, "unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

[[nodiscard]] inline Matrix unvec_square(const Vector& v) {
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    require(n * n == v.size(), "unvec_square: length is not a perfect square");
    return unvec(v, n, n);
}

/// SplitMix64 finalizer; used wherever a counter-based deterministic stream is needed.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Maps 64 random bits to a double in [0, 1).
[[nodiscard]] constexpr double unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Small deterministic generator (SplitMix64) with platform-independent output.
class SplitMix {
public:
    explicit constexpr SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [lo, hi).
    constexpr double uniform(double lo = 0.0, double hi = 1.0) noexcept {
        return lo + (hi - lo) * unit_double(next());
    }

private:
    std::uint64_t state_;
};

}  // namespace znn
