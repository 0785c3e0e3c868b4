#pragma once

// Adaptive Dormand-Prince 5(4) integrator with the continuous extension of
// Hairer, Norsett & Wanner (dopri5). Used as the continuous-time oracle for the
// discrete steppers and for convergence-rate measurements.

#include "znn/core.hpp"
#include "znn/model.hpp"
#include "znn/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace znn {

struct ReferenceOptions {
    std::size_t samples = 200;  // uniform dense-output points on [0, horizon]
    long max_steps = 5'000'000;
};

namespace detail::dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace detail::dopri

/// Integrates the model on [0, horizon] with local error <= tol (mixed
/// absolute/relative) and returns dense output at `options.samples` uniform times.
template <ZnnModel M>
[[nodiscard]] Trajectory integrate_reference(const M& m, const Vector& x0, double horizon, double tol,
                                             const ReferenceOptions& options = {}) {
    using namespace detail::dopri;
    if (!(tol >= 1e-12 && tol <= 1e-2)) throw InvalidInput("integrate_reference: tol must lie in [1e-12, 1e-2]");
    if (!(horizon >= 0.0)) throw InvalidInput("integrate_reference: horizon must be >= 0");
    if (x0.size() != m.state_dim()) throw InvalidInput("integrate_reference: x0 has the wrong length");
    if (options.samples < 2 && horizon > 0.0) throw InvalidInput("integrate_reference: need >= 2 samples");

    const Index n = m.state_dim();
    const Index na = m.aux_dim();
    Trajectory traj;
    auto emit = [&](double t, const Vector& y) {
        const Vector x = y.head(n);
        traj.push(t, x, y.tail(na), m.residual_norm(x, t));
        if (m.has_noise()) traj.noise_log.push_back(m.noise_at(t, -1));
    };

    Vector y(n + na);
    y << x0, Vector::Zero(na);
    if (horizon == 0.0) {
        emit(0.0, y);
        return traj;
    }

    EvalContext ctx;  // analytic derivatives, continuous-time noise
    auto f = [&](double t, const Vector& state) {
        const auto r = m.rhs(state.head(n), state.tail(na), t, ctx);
        Vector out(n + na);
        out << r.xdot, r.auxdot;
        return out;
    };
    auto err_norm = [tol](const Vector& err, const Vector& a, const Vector& b) {
        const Vector scale = (tol + tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
        return std::sqrt(err.cwiseQuotient(scale).squaredNorm() / static_cast<double>(err.size()));
    };

    const std::size_t count = options.samples;
    auto sample_time = [&](std::size_t j) {
        return j + 1 == count ? horizon : horizon * static_cast<double>(j) / static_cast<double>(count - 1);
    };
    std::size_t next_sample = 0;
    emit(0.0, y);
    next_sample = 1;

    double t = 0.0;
    Vector k1 = f(t, y);

    // Initial step (Hairer's heuristic).
    double h;
    {
        const Vector sc = (tol + tol * y.cwiseAbs().array()).matrix();
        const double d0 = std::sqrt(y.cwiseQuotient(sc).squaredNorm() / static_cast<double>(y.size()));
        const double d1n = std::sqrt(k1.cwiseQuotient(sc).squaredNorm() / static_cast<double>(y.size()));
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, horizon);
        const Vector y1 = y + h0 * k1;
        const Vector f1 = f(t + h0, y1);
        const double d2 = std::sqrt((f1 - k1).cwiseQuotient(sc).squaredNorm() / static_cast<double>(y.size())) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100.0 * h0, h1, horizon});
    }

    bool rejected_last = false;
    long steps = 0;
    while (t < horizon) {
        if (++steps > options.max_steps) throw StiffnessFailure(t, h);
        if (h < 1e-14 * horizon) throw StiffnessFailure(t, h);
        bool last = false;
        if (t + h >= horizon) {
            h = horizon - t;
            last = true;
        }

        const Vector k2 = f(t + c2 * h, y + h * (a21 * k1));
        const Vector k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const Vector k7 = f(t + h, ynew);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = err_norm(err, y, ynew);

        if (!std::isfinite(en) || en > 1.0) {
            const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h *= std::min(1.0, fac);
            rejected_last = true;
            continue;
        }

        // Dense output on [t, t + h].
        const Vector r1 = y;
        const Vector ydiff = ynew - y;
        const Vector bspl = h * k1 - ydiff;
        const Vector r4 = ydiff - h * k7 - bspl;
        const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        const double t_end = last ? horizon : t + h;
        while (next_sample < count && sample_time(next_sample) <= t_end) {
            const double ts = sample_time(next_sample);
            if (ts == t_end) {
                emit(ts, ynew);
            } else {
                const double th = (ts - t) / h;
                const double th1 = 1.0 - th;
                emit(ts, r1 + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5))));
            }
            ++next_sample;
        }

        t = t_end;
        y = ynew;
        k1 = k7;
        double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 5.0);
        h *= fac;
        rejected_last = false;
    }
    while (next_sample < count) emit(sample_time(next_sample++), y);
    return traj;
}

}  // namespace znn
