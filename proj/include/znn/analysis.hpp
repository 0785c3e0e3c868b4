#pragma once

// Experiment analysis: exponential-rate fitting, noise sweeps, order reports.

#include "znn/core.hpp"
#include "znn/discretize.hpp"
#include "znn/evolution.hpp"
#include "znn/model.hpp"
#include "znn/noise.hpp"
#include "znn/reference.hpp"
#include "znn/trajectory.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace znn {

/// Runs body(i) for i in [0, count) on up to `jobs` threads (0: hardware
/// concurrency). Rethrows the exception of the lowest failing index.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// =============================================================================
// Convergence-rate fitting
// =============================================================================

inline constexpr std::array<double, 3> kToleranceThresholds = {1e-2, 1e-4, 1e-6};
inline constexpr double kFitFloor = 1e-10;
inline constexpr double kExponentialR2 = 0.99;

struct ConvergenceReport {
    std::optional<double> rate;  // present only when the fit is exponential
    double slope = 0.0;
    double r_squared = 0.0;
    double fit_rms = 0.0;  // RMS residual of the log-linear fit
    bool exponential = false;
    std::size_t window = 0;
    std::array<std::optional<double>, 3> time_to_tolerance{};  // for kToleranceThresholds
    double terminal_residual = 0.0;
};

/// First time the residual drops to `tol`, log-interpolated between samples.
[[nodiscard]] inline std::optional<double> time_to_tolerance(const Trajectory& traj, double tol) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double r = traj.residual_norms[k];
        if (r > tol) continue;
        if (k == 0) return traj.times[0];
        const double r0 = traj.residual_norms[k - 1];
        const double t0 = traj.times[k - 1];
        const double t1 = traj.times[k];
        if (r <= 0.0 || r0 <= 0.0) return t1;
        const double f = (std::log(r0) - std::log(tol)) / (std::log(r0) - std::log(r));
        return t0 + f * (t1 - t0);
    }
    return std::nullopt;
}

/// Least-squares fit of log ||e|| against t over the samples before the
/// residual first reaches 1e-10; rate = -slope when R^2 >= 0.99.
[[nodiscard]] inline ConvergenceReport fit_convergence_rate(const Trajectory& traj) {
    if (traj.empty()) throw NothingToFit("fit_convergence_rate: empty trajectory");
    if (std::all_of(traj.residual_norms.begin(), traj.residual_norms.end(), [](double r) { return r == 0.0; }))
        throw NothingToFit("fit_convergence_rate: all residuals are zero");

    std::size_t end = 0;
    while (end < traj.size() && traj.residual_norms[end] > kFitFloor) ++end;
    if (end < 20)
        throw InvalidInput("fit_convergence_rate: need >= 20 positive samples above 1e-10, got " +
                           std::to_string(end));

    double st = 0, sy = 0;
    for (std::size_t k = 0; k < end; ++k) {
        st += traj.times[k];
        sy += std::log(traj.residual_norms[k]);
    }
    const double n = static_cast<double>(end);
    const double mt = st / n, my = sy / n;
    double stt = 0, sty = 0, syy = 0;
    for (std::size_t k = 0; k < end; ++k) {
        const double dt = traj.times[k] - mt;
        const double dy = std::log(traj.residual_norms[k]) - my;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (!(stt > 0.0)) throw InvalidInput("fit_convergence_rate: samples share one time");

    ConvergenceReport rep;
    rep.window = end;
    rep.slope = sty / stt;
    double sse = 0;
    for (std::size_t k = 0; k < end; ++k) {
        const double fit = my + rep.slope * (traj.times[k] - mt);
        const double d = std::log(traj.residual_norms[k]) - fit;
        sse += d * d;
    }
    rep.fit_rms = std::sqrt(sse / n);
    rep.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    rep.exponential = rep.r_squared >= kExponentialR2 && rep.slope < 0.0;
    if (rep.exponential) rep.rate = -rep.slope;
    for (std::size_t i = 0; i < kToleranceThresholds.size(); ++i)
        rep.time_to_tolerance[i] = time_to_tolerance(traj, kToleranceThresholds[i]);
    rep.terminal_residual = traj.residual_norms.back();
    return rep;
}

// =============================================================================
// Noise sweeps
// =============================================================================

enum class NoiseKind { Constant, Linear, BoundedRandom };

[[nodiscard]] constexpr std::string_view to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::Constant: return "Constant";
        case NoiseKind::Linear: return "Linear";
        case NoiseKind::BoundedRandom: return "BoundedRandom";
    }
    return "?";
}

/// Scalar (broadcast) noise of the given kind; nullopt for zero magnitude.
[[nodiscard]] inline std::optional<NoiseSpec> make_noise(NoiseKind kind, double magnitude, std::uint64_t seed) {
    if (magnitude < 0.0 || !std::isfinite(magnitude)) throw InvalidInput("noise magnitude must be finite and >= 0");
    if (magnitude == 0.0) return std::nullopt;
    switch (kind) {
        case NoiseKind::Constant: return ConstantNoise{Vector::Constant(1, magnitude)};
        case NoiseKind::Linear: return LinearNoise{Vector::Constant(1, magnitude)};
        case NoiseKind::BoundedRandom: return BoundedRandomNoise{magnitude, seed};
    }
    return std::nullopt;
}

struct NamedFormula {
    std::string name;
    EvolutionSpec spec;
};

struct SweepOptions {
    NoiseKind noise = NoiseKind::Constant;
    double horizon = 5.0;
    /// Discrete scheme; the reference integrator is used when absent.
    std::optional<Scheme> scheme;
    double tol = 1e-9;  // reference integrator tolerance
    std::optional<Vector> x0;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
};

struct SweepTable {
    std::vector<std::string> formulas;
    std::vector<double> magnitudes;
    std::vector<std::vector<double>> residual;  // [formula][magnitude]: max residual over the final 10%
};

namespace detail {

[[nodiscard]] inline Trajectory run_model(const AssembledModel& m, const Vector& x0, double horizon,
                                          const std::optional<Scheme>& scheme, double tol) {
    if (scheme) return solve_discrete(m, x0, *scheme, std::max(1L, std::lround(horizon / scheme->gap)));
    return integrate_reference(m, x0, horizon, tol);
}

[[nodiscard]] inline Vector default_start(const ProblemInstance& p, const std::optional<Vector>& x0) {
    if (x0) return *x0;
    if (p.ground_truth) return p.ground_truth(0.0);
    return Vector::Zero(p.state_dim);
}

}  // namespace detail

[[nodiscard]] inline SweepTable noise_sweep(const ProblemInstance& problem, const std::vector<NamedFormula>& formulas,
                                            const std::vector<double>& magnitudes, const SweepOptions& options = {}) {
    if (formulas.size() < 2) throw InvalidInput("noise_sweep: need >= 2 formulas");
    if (magnitudes.size() < 2) throw InvalidInput("noise_sweep: need >= 2 magnitudes");
    for (const auto& f : formulas) validate(f.spec);

    SweepTable table;
    for (const auto& f : formulas) table.formulas.push_back(f.name);
    table.magnitudes = magnitudes;
    table.residual.assign(formulas.size(), std::vector<double>(magnitudes.size(), 0.0));
    const Vector x0 = detail::default_start(problem, options.x0);

    parallel_for(formulas.size() * magnitudes.size(), options.jobs, [&](std::size_t cell) {
        const std::size_t i = cell / magnitudes.size();
        const std::size_t j = cell % magnitudes.size();
        AssembledModel m = assemble(problem, formulas[i].spec);
        if (auto n = make_noise(options.noise, magnitudes[j], options.seed)) m = perturb_model(m, *n);
        table.residual[i][j] = steady_residual(detail::run_model(m, x0, options.horizon, options.scheme, options.tol));
    });
    return table;
}

[[nodiscard]] inline std::string to_csv(const SweepTable& table) {
    std::string out = "formula";
    for (double m : table.magnitudes) {
        out += ',';
        detail::append_double(out, m);
    }
    out += '\n';
    for (std::size_t i = 0; i < table.formulas.size(); ++i) {
        out += table.formulas[i];
        for (double r : table.residual[i]) {
            out += ',';
            detail::append_double(out, r);
        }
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::string to_markdown(const SweepTable& table) {
    char buf[64];
    std::string out = "| formula |";
    for (double m : table.magnitudes) {
        std::snprintf(buf, sizeof buf, " %.6g |", m);
        out += buf;
    }
    out += "\n|---|";
    for (std::size_t j = 0; j < table.magnitudes.size(); ++j) out += "---|";
    out += '\n';
    for (std::size_t i = 0; i < table.formulas.size(); ++i) {
        out += "| " + table.formulas[i] + " |";
        for (double r : table.residual[i]) {
            std::snprintf(buf, sizeof buf, " %.6e |", r);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

// =============================================================================
// Order-of-accuracy report
// =============================================================================

struct OrderRow {
    SchemeKind scheme;
    std::vector<OrderSample> samples;
    std::optional<double> order;  // mean log2 of consecutive residual ratios
    bool exact = false;           // every residual <= 1e-10
};

struct OrderReportOptions {
    double initial_gap = 4e-3;
    int halvings = 4;
    OrderOptions run;
    unsigned jobs = 0;
};

[[nodiscard]] inline std::vector<double> halving_gaps(double initial, int halvings) {
    std::vector<double> gaps;
    double g = initial;
    for (int i = 0; i <= halvings; ++i, g *= 0.5) gaps.push_back(g);
    return gaps;
}

template <ZnnModel M>
[[nodiscard]] std::vector<OrderRow> order_report(const M& m, const std::vector<SchemeKind>& schemes,
                                                 const OrderReportOptions& options = {}) {
    if (options.halvings < 3) throw InvalidInput("order_report: need >= 3 halvings");
    if (!(options.initial_gap > 0.0)) throw InvalidInput("order_report: initial gap must be positive");
    const auto gaps = halving_gaps(options.initial_gap, options.halvings);

    std::vector<OrderRow> rows(schemes.size());
    parallel_for(schemes.size(), options.jobs, [&](std::size_t i) {
        OrderRow row;
        row.scheme = schemes[i];
        row.samples = empirical_order(m, schemes[i], gaps, options.run);
        row.exact = std::all_of(row.samples.begin(), row.samples.end(),
                                [](const OrderSample& s) { return s.steady_residual <= kFitFloor; });
        if (!row.exact) {
            double sum = 0.0;
            for (std::size_t k = 0; k + 1 < row.samples.size(); ++k)
                sum += std::log2(row.samples[k].steady_residual / row.samples[k + 1].steady_residual);
            row.order = sum / static_cast<double>(row.samples.size() - 1);
        }
        rows[i] = std::move(row);
    });
    return rows;
}

[[nodiscard]] inline std::string to_markdown(const std::vector<OrderRow>& rows) {
    char buf[64];
    std::string out = "| scheme | order | steady residuals (gap: residual) |\n|---|---|---|\n";
    for (const auto& row : rows) {
        out += "| " + std::string(to_string(row.scheme)) + " | ";
        if (row.exact) {
            out += "exact";
        } else {
            std::snprintf(buf, sizeof buf, "%.3f", *row.order);
            out += buf;
        }
        out += " |";
        for (const auto& s : row.samples) {
            std::snprintf(buf, sizeof buf, " %.3g: %.4e;", s.gap, s.steady_residual);
            out += buf;
        }
        out += " |\n";
    }
    return out;
}

[[nodiscard]] inline std::string to_csv(const std::vector<OrderRow>& rows) {
    std::string out = "scheme,gap,steady_residual,order\n";
    for (const auto& row : rows)
        for (const auto& s : row.samples) {
            out += std::string(to_string(row.scheme)) + ',';
            detail::append_double(out, s.gap);
            out += ',';
            detail::append_double(out, s.steady_residual);
            out += ',';
            if (row.exact)
                out += "exact";
            else
                detail::append_double(out, *row.order);
            out += '\n';
        }
    return out;
}

}  // namespace znn
