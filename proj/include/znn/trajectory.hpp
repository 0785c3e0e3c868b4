#pragma once

#include "znn/core.hpp"
#include "znn/operator.hpp"

#include <concepts>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace znn {

/// Anything the steppers and the reference integrator can advance.
template <class M>
concept ZnnModel = requires(const M& m, const Vector& v, double t, const EvalContext& ctx, long k) {
    { m.state_dim() } -> std::convertible_to<Index>;
    { m.aux_dim() } -> std::convertible_to<Index>;
    { m.rhs(v, v, t, ctx) };
    { m.residual_norm(v, t) } -> std::convertible_to<double>;
    { m.has_noise() } -> std::convertible_to<bool>;
    { m.noise_at(t, k) } -> std::convertible_to<Vector>;
};

/// Sampled solution: all sequences have one entry per time.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> aux;
    std::vector<double> residual_norms;
    std::vector<Vector> noise_log;  // empty when the model is noise-free

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }

    void push(double t, Vector x, Vector a, double residual) {
        times.push_back(t);
        states.push_back(std::move(x));
        aux.push_back(std::move(a));
        residual_norms.push_back(residual);
    }
};

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace detail

/// CSV: t,residual_norm,x_0..x_{n-1}[,aux_0..][,noise_0..]; 17 significant digits, LF endings.
[[nodiscard]] inline std::string to_csv(const Trajectory& traj) {
    std::string out = "t,residual_norm";
    const Index n = traj.states.empty() ? 0 : traj.states.front().size();
    const Index na = traj.aux.empty() ? 0 : traj.aux.front().size();
    const Index nn = traj.noise_log.empty() ? 0 : traj.noise_log.front().size();
    for (Index i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
    for (Index i = 0; i < na; ++i) out += ",aux_" + std::to_string(i);
    for (Index i = 0; i < nn; ++i) out += ",noise_" + std::to_string(i);
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        detail::append_double(out, traj.times[k]);
        out += ',';
        detail::append_double(out, traj.residual_norms[k]);
        for (Index i = 0; i < n; ++i) {
            out += ',';
            detail::append_double(out, traj.states[k][i]);
        }
        for (Index i = 0; i < na; ++i) {
            out += ',';
            detail::append_double(out, traj.aux[k][i]);
        }
        for (Index i = 0; i < nn; ++i) {
            out += ',';
            detail::append_double(out, traj.noise_log[k][i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace znn
