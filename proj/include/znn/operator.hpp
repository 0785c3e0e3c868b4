#pragma once

#include "znn/core.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace znn {

/// How operator time-derivatives are obtained when a model is evaluated.
enum class TimePartial {
    Analytic,   // declared derivative; central difference (h = 1e-6) when absent
    Backward1,  // (A(t) - A(t - gap)) / gap
    Backward2,  // (3A(t) - 4A(t - gap) + A(t - 2 gap)) / (2 gap)
};

/// Per-evaluation settings shared by every operator sample of one model call.
struct EvalContext {
    TimePartial partial = TimePartial::Analytic;
    double gap = 0.0;
    /// Strict predict-manner mode: no operator is sampled after `anchor`. Requests
    /// beyond it are answered by linear extrapolation from anchor and anchor - gap.
    std::optional<double> anchor;
    /// Discrete step index for zero-order-hold noise; negative for continuous time.
    long step_index = -1;
};

inline constexpr double kCentralDifferenceStep = 1e-6;

/// A(t) with an optional declared derivative. Shape is fixed over time.
template <class Scalar>
struct BasicOperator {
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Function = std::function<MatrixType(double)>;

    Function value;
    Function derivative;  // may be empty
    Index rows = 0;
    Index cols = 0;

    [[nodiscard]] bool has_derivative() const { return static_cast<bool>(derivative); }
};

using TimeVaryingOperator = BasicOperator<double>;
using ComplexOperator = BasicOperator<Complex>;

template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> constant_operator(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
    using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const M zero = M::Zero(m.rows(), m.cols());
    return {[m](double) { return m; }, [zero](double) { return zero; }, m.rows(), m.cols()};
}

[[nodiscard]] inline TimeVaryingOperator constant_operator(const Matrix& m) {
    return constant_operator<double>(m);
}

/// Value of `op` at t honoring the strict-mode anchor.
template <class Scalar>
[[nodiscard]] auto sample(const BasicOperator<Scalar>& op, double t, const EvalContext& ctx) {
    using M = typename BasicOperator<Scalar>::MatrixType;
    if (ctx.anchor && t > *ctx.anchor) {
        const double a = *ctx.anchor;
        const M now = op.value(a);
        const M before = op.value(a - ctx.gap);
        return M(now + ((t - a) / ctx.gap) * (now - before));
    }
    M out = op.value(t);
    if (out.rows() != op.rows || out.cols() != op.cols)
        throw InvalidInput("operator returned a matrix of unexpected shape");
    return out;
}

/// Time derivative of `op` at t per the context's TimePartial mode.
template <class Scalar>
[[nodiscard]] auto sample_derivative(const BasicOperator<Scalar>& op, double t, const EvalContext& ctx) {
    using M = typename BasicOperator<Scalar>::MatrixType;
    if (ctx.anchor && t > *ctx.anchor) {
        // Slope of the extrapolant.
        const double a = *ctx.anchor;
        return M((op.value(a) - op.value(a - ctx.gap)) / ctx.gap);
    }
    switch (ctx.partial) {
        case TimePartial::Backward1:
            return M((op.value(t) - op.value(t - ctx.gap)) / ctx.gap);
        case TimePartial::Backward2:
            return M((3.0 * op.value(t) - 4.0 * op.value(t - ctx.gap) + op.value(t - 2.0 * ctx.gap)) /
                     (2.0 * ctx.gap));
        case TimePartial::Analytic:
        default:
            break;
    }
    if (op.has_derivative()) return M(op.derivative(t));
    if (ctx.anchor) {
        // A central difference would look ahead; use the second-order backward rule.
        const double h = ctx.gap > 0.0 ? ctx.gap : kCentralDifferenceStep;
        return M((3.0 * op.value(t) - 4.0 * op.value(t - h) + op.value(t - 2.0 * h)) / (2.0 * h));
    }
    const double h = kCentralDifferenceStep;
    return M((op.value(t + h) - op.value(t - h)) / (2.0 * h));
}

// =============================================================================
// Operator algebra with product-rule derivatives
// =============================================================================

namespace ops {

namespace detail {

template <class Scalar, class ValueFn, class DerivFn>
[[nodiscard]] BasicOperator<Scalar> combine(Index rows, Index cols, bool with_derivative, ValueFn value,
                                            DerivFn derivative) {
    BasicOperator<Scalar> out;
    out.rows = rows;
    out.cols = cols;
    out.value = std::move(value);
    if (with_derivative) out.derivative = std::move(derivative);
    return out;
}

}  // namespace detail

template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> add(const BasicOperator<Scalar>& a, const BasicOperator<Scalar>& b,
                                        Scalar sb = Scalar(1)) {
    if (a.rows != b.rows || a.cols != b.cols) throw InvalidInput("ops::add: shape mismatch");
    using M = typename BasicOperator<Scalar>::MatrixType;
    return detail::combine<Scalar>(
        a.rows, a.cols, a.has_derivative() && b.has_derivative(),
        [va = a.value, vb = b.value, sb](double t) { return M(va(t) + sb * vb(t)); },
        [da = a.derivative, db = b.derivative, sb](double t) { return M(da(t) + sb * db(t)); });
}

template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> mul(const BasicOperator<Scalar>& a, const BasicOperator<Scalar>& b) {
    if (a.cols != b.rows) throw InvalidInput("ops::mul: inner dimension mismatch");
    using M = typename BasicOperator<Scalar>::MatrixType;
    return detail::combine<Scalar>(
        a.rows, b.cols, a.has_derivative() && b.has_derivative(),
        [va = a.value, vb = b.value](double t) { return M(va(t) * vb(t)); },
        [va = a.value, vb = b.value, da = a.derivative, db = b.derivative](double t) {
            return M(da(t) * vb(t) + va(t) * db(t));
        });
}

template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> transpose(const BasicOperator<Scalar>& a) {
    using M = typename BasicOperator<Scalar>::MatrixType;
    return detail::combine<Scalar>(
        a.cols, a.rows, a.has_derivative(), [va = a.value](double t) { return M(va(t).transpose()); },
        [da = a.derivative](double t) { return M(da(t).transpose()); });
}

/// Elementwise product.
template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> hadamard(const BasicOperator<Scalar>& a, const BasicOperator<Scalar>& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw InvalidInput("ops::hadamard: shape mismatch");
    using M = typename BasicOperator<Scalar>::MatrixType;
    return detail::combine<Scalar>(
        a.rows, a.cols, a.has_derivative() && b.has_derivative(),
        [va = a.value, vb = b.value](double t) { return M(va(t).cwiseProduct(vb(t))); },
        [va = a.value, vb = b.value, da = a.derivative, db = b.derivative](double t) {
            return M(da(t).cwiseProduct(vb(t)) + va(t).cwiseProduct(db(t)));
        });
}

template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> scale(const BasicOperator<Scalar>& a, Scalar s) {
    using M = typename BasicOperator<Scalar>::MatrixType;
    return detail::combine<Scalar>(
        a.rows, a.cols, a.has_derivative(), [va = a.value, s](double t) { return M(s * va(t)); },
        [da = a.derivative, s](double t) { return M(s * da(t)); });
}

}  // namespace ops

// =============================================================================
// Sample auditing
// =============================================================================

/// Thread-safe record of every time at which an instrumented operator was read.
class SampleLog {
public:
    void record(double t) {
        std::lock_guard lock(mutex_);
        times_.push_back(t);
    }

    [[nodiscard]] std::vector<double> times() const {
        std::lock_guard lock(mutex_);
        return times_;
    }

    void clear() {
        std::lock_guard lock(mutex_);
        times_.clear();
    }

    [[nodiscard]] std::optional<double> latest() const {
        std::lock_guard lock(mutex_);
        if (times_.empty()) return std::nullopt;
        double m = times_.front();
        for (double t : times_) m = std::max(m, t);
        return m;
    }

private:
    mutable std::mutex mutex_;
    std::vector<double> times_;
};

/// Copy of `op` that reports each value and derivative read to `log`.
template <class Scalar>
[[nodiscard]] BasicOperator<Scalar> instrument(const BasicOperator<Scalar>& op, std::shared_ptr<SampleLog> log) {
    BasicOperator<Scalar> out = op;
    out.value = [inner = op.value, log](double t) {
        log->record(t);
        return inner(t);
    };
    if (op.has_derivative()) {
        out.derivative = [inner = op.derivative, log](double t) {
            log->record(t);
            return inner(t);
        };
    }
    return out;
}

}  // namespace znn
