#pragma once

// TDOA localization per Eq. (5). Coordinates are taken relative to observer 1,
// so with a_i = obs_i - obs_1, h_i = v d_i and r_1 = |p - obs_1|:
//   a_i . p + h_i r_1 = (|a_i|^2 - h_i^2) / 2,   i = 2..m
// which is Eq. (5) with g_i read as h_i^2 + 2 r_1 h_i + 2 a_i . p (= |a_i|^2).

#include "znn/core.hpp"
#include "znn/discretize.hpp"
#include "znn/evolution.hpp"
#include "znn/model.hpp"
#include "znn/noise.hpp"
#include "znn/problem.hpp"

#include <Eigen/SVD>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace znn {

using Point3 = Eigen::Vector3d;

struct Scenario {
    std::vector<Point3> observers;
    double v = 343.0;
    std::function<Point3(double)> target_path;
    double horizon = 1.0;
    double gap = 1e-3;
};

/// Delays d_i(t) of observers 2..m relative to observer 1, plus the sampled
/// values at t_k = k * gap for k = 0..n (for export and auditing).
struct DelayTrack {
    std::function<Vector(double)> delays;
    std::vector<double> times;
    std::vector<Vector> samples;
    std::vector<Vector> noise;  // empty for noise-free tracks
};

inline void validate(const Scenario& s) {
    if (s.observers.size() < 5)
        throw InsufficientObservers("TDOA needs at least 5 observers, got " + std::to_string(s.observers.size()));
    if (!(s.v > 0.0)) throw InvalidInput("scenario: propagation speed must be positive");
    if (!s.target_path) throw InvalidInput("scenario: target path missing");
    if (!(s.horizon >= 0.0)) throw InvalidInput("scenario: horizon must be >= 0");
    if (!(s.gap > 0.0)) throw InvalidInput("scenario: gap must be positive");
}

/// Noise-free delays at time t.
[[nodiscard]] inline Vector exact_delays(const Scenario& s, double t) {
    const Point3 p = s.target_path(t);
    const double r1 = (p - s.observers.front()).norm();
    Vector d(static_cast<Index>(s.observers.size()) - 1);
    for (std::size_t i = 1; i < s.observers.size(); ++i)
        d[static_cast<Index>(i) - 1] = ((p - s.observers[i]).norm() - r1) / s.v;
    return d;
}

/// True unknown [p - obs_1; r_1] at time t.
[[nodiscard]] inline Vector tdoa_truth(const Scenario& s, double t) {
    const Point3 rel = s.target_path(t) - s.observers.front();
    Vector out(4);
    out << rel, rel.norm();
    return out;
}

/// Delay track with optional additive delay noise (seconds), sampled with the
/// step index llround(t / gap).
[[nodiscard]] inline DelayTrack simulate_delays(const Scenario& s, const std::optional<NoiseSpec>& noise = std::nullopt) {
    validate(s);
    if (noise) validate(*noise);
    const Index dim = static_cast<Index>(s.observers.size()) - 1;
    DelayTrack track;
    track.delays = [s, noise, dim](double t) {
        Vector d = exact_delays(s, t);
        if (noise) d += sample_noise(*noise, t, std::lround(t / s.gap), dim);
        return d;
    };
    const long n = std::lround(s.horizon / s.gap);
    for (long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * s.gap;
        track.times.push_back(t);
        track.samples.push_back(track.delays(t));
        if (noise) track.noise.push_back(sample_noise(*noise, t, k, dim));
    }
    return track;
}

struct TdoaSystem {
    Matrix matrix;  // (m-1) x 4, rows [a_i, b_i, c_i, v d_i]
    Vector rhs;     // (m-1)
};

namespace detail {

[[nodiscard]] inline TdoaSystem tdoa_rows(const Scenario& s, const Vector& d) {
    const Index rows = static_cast<Index>(s.observers.size()) - 1;
    if (d.size() != rows) throw InvalidInput("delay vector has the wrong length");
    TdoaSystem sys{Matrix(rows, 4), Vector(rows)};
    for (Index i = 0; i < rows; ++i) {
        const Point3 a = s.observers[static_cast<std::size_t>(i) + 1] - s.observers.front();
        const double h = s.v * d[i];
        sys.matrix.row(i) << a.transpose(), h;
        sys.rhs[i] = 0.5 * (a.squaredNorm() - h * h);
    }
    return sys;
}

}  // namespace detail

/// Eq. (5) at time t.
[[nodiscard]] inline TdoaSystem build_tdoa_system(const Scenario& s, const DelayTrack& track, double t) {
    validate(s);
    TdoaSystem sys = detail::tdoa_rows(s, track.delays(t));
    Eigen::JacobiSVD<Matrix> svd(sys.matrix);
    const auto& sv = svd.singularValues();
    if (!(sv[3] > 1e-10 * sv[0])) throw DegenerateGeometry("TDOA matrix has rank < 4 at t=" + std::to_string(t));
    return sys;
}

/// g_i(t) = h_i^2 + 2 r_1 h_i + 2 (a_i x + b_i y + c_i z) at the unknown [p_rel; r_1].
[[nodiscard]] inline Vector tdoa_g(const Scenario& s, const DelayTrack& track, double t, const Vector& unknown) {
    const Vector d = track.delays(t);
    Vector g(d.size());
    for (Index i = 0; i < d.size(); ++i) {
        const Point3 a = s.observers[static_cast<std::size_t>(i) + 1] - s.observers.front();
        const double h = s.v * d[i];
        g[i] = h * h + 2.0 * unknown[3] * h + 2.0 * a.dot(unknown.head<3>());
    }
    return g;
}

/// Eq. (5) as a LinearSystem problem with unknown [p - obs_1; r_1].
[[nodiscard]] inline ProblemInstance tdoa_problem(const Scenario& s, const DelayTrack& track) {
    validate(s);
    const Index rows = static_cast<Index>(s.observers.size()) - 1;
    TimeVaryingOperator A{[s, f = track.delays](double t) { return detail::tdoa_rows(s, f(t)).matrix; }, {}, rows, 4};
    TimeVaryingOperator b{[s, f = track.delays](double t) { return Matrix(detail::tdoa_rows(s, f(t)).rhs); }, {},
                          rows, 1};
    return make_problem(ProblemKind::LinearSystem, {{"A", std::move(A)}, {"b", std::move(b)}},
                        [s](double t) { return tdoa_truth(s, t); });
}

struct LocalizeOptions {
    /// Initial [p - obs_1; r_1]; default is the observer centroid.
    std::optional<Vector> x0;
    /// Disturbance added to the evolution formula.
    std::optional<NoiseSpec> evolution_noise;
};

struct Localization {
    Trajectory trajectory;
    std::vector<Point3> estimates;       // absolute coordinates
    std::vector<double> position_errors;  // |estimate - truth|
};

/// Runs the ZNN on Eq. (5). The scheme's gap is replaced by the scenario's.
[[nodiscard]] inline Localization localize(const Scenario& s, const DelayTrack& track, const EvolutionSpec& evolution,
                                           Scheme scheme, const LocalizeOptions& options = {}) {
    validate(s);
    scheme.gap = s.gap;
    (void)build_tdoa_system(s, track, 0.0);  // geometry check

    AssembledModel m = assemble(tdoa_problem(s, track), evolution);
    if (options.evolution_noise) m = perturb_model(m, *options.evolution_noise);

    Vector x0;
    if (options.x0) {
        x0 = *options.x0;
        if (x0.size() != 4) throw InvalidInput("localize: x0 must have 4 entries");
    } else {
        Point3 centroid = Point3::Zero();
        for (const auto& o : s.observers) centroid += o;
        centroid /= static_cast<double>(s.observers.size());
        x0.resize(4);
        x0 << centroid - s.observers.front(), (centroid - s.observers.front()).norm();
    }

    Localization out;
    const long n = std::lround(s.horizon / s.gap);
    if (n == 0) {
        out.trajectory.push(0.0, x0, Vector::Zero(m.aux_dim()), m.residual_norm(x0, 0.0));
        if (m.has_noise()) out.trajectory.noise_log.push_back(m.noise_at(0.0, 0));
    } else {
        out.trajectory = solve_discrete(m, x0, scheme, n);
    }
    for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
        const Point3 est = out.trajectory.states[k].head<3>() + s.observers.front();
        out.estimates.push_back(est);
        out.position_errors.push_back((est - s.target_path(out.trajectory.times[k])).norm());
    }
    return out;
}

/// Report CSV: t,pos_error,x,y,z,r1 (absolute coordinates).
[[nodiscard]] inline std::string to_report_csv(const Localization& loc) {
    std::string out = "t,pos_error,x,y,z,r1\n";
    for (std::size_t k = 0; k < loc.trajectory.size(); ++k) {
        const double values[] = {loc.trajectory.times[k], loc.position_errors[k], loc.estimates[k].x(),
                                 loc.estimates[k].y(),     loc.estimates[k].z(),  loc.trajectory.states[k][3]};
        for (std::size_t i = 0; i < 6; ++i) {
            if (i) out += ',';
            detail::append_double(out, values[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace znn
