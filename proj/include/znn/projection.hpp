#pragma once

#include "znn/core.hpp"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

namespace znn {

// =============================================================================
// Nonconvex projection sets. Each set contains the origin.
// =============================================================================

/// Elementwise interval [lo, hi] with lo <= 0 <= hi.
struct BoxSet {
    double lo = -1.0;
    double hi = 1.0;
};

/// {0} union {v : r_inner <= |v| <= r_outer}.
struct SphereShellSet {
    double r_inner = 0.0;
    double r_outer = 1.0;
};

/// Elementwise {0} union {u in [lo, hi] : |u| >= dead_zone_radius}.
struct HoleBoxSet {
    double lo = -1.0;
    double hi = 1.0;
    double dead_zone_radius = 0.0;
};

/// Finite point set; must contain the zero vector.
struct LatticeSet {
    std::vector<Vector> points;
};

using ProjectionSet = std::variant<BoxSet, SphereShellSet, HoleBoxSet, LatticeSet>;

namespace detail {

[[nodiscard]] inline bool lex_less(const Vector& a, const Vector& b) {
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

[[nodiscard]] inline Vector project(const Vector& d, const BoxSet& s) {
    return d.cwiseMax(s.lo).cwiseMin(s.hi);
}

[[nodiscard]] inline Vector project(const Vector& d, const SphereShellSet& s) {
    const double norm = d.norm();
    if (norm == 0.0) return Vector::Zero(d.size());
    if (norm > s.r_outer) return d * (s.r_outer / norm);
    if (norm >= s.r_inner) return d;
    // Inside the hole: origin or the nearest inner-sphere point.
    const Vector on_sphere = d * (s.r_inner / norm);
    const double to_origin = norm;
    const double to_sphere = s.r_inner - norm;
    if (to_origin < to_sphere) return Vector::Zero(d.size());
    if (to_sphere < to_origin) return on_sphere;
    const Vector zero = Vector::Zero(d.size());
    return lex_less(on_sphere, zero) ? on_sphere : zero;
}

// Separable per coordinate, so the lexicographic tie-break reduces to the
// smaller candidate in each coordinate.
[[nodiscard]] inline double project_scalar(double u, const HoleBoxSet& s) {
    const double c = std::clamp(u, s.lo, s.hi);
    if (std::abs(c) >= s.dead_zone_radius) return c;
    double best = 0.0;
    double best_dist = std::abs(u);
    for (double cand : {-s.dead_zone_radius, s.dead_zone_radius}) {
        if (cand < s.lo || cand > s.hi) continue;
        const double dist = std::abs(u - cand);
        if (dist < best_dist || (dist == best_dist && cand < best)) {
            best = cand;
            best_dist = dist;
        }
    }
    return best;
}

[[nodiscard]] inline Vector project(const Vector& d, const HoleBoxSet& s) {
    return d.unaryExpr([&s](double u) { return project_scalar(u, s); });
}

[[nodiscard]] inline Vector project(const Vector& d, const LatticeSet& s) {
    if (s.points.empty()) throw InvalidSet("nonconvex_project: empty lattice");
    const Vector* best = nullptr;
    double best_dist = 0.0;
    for (const auto& p : s.points) {
        if (p.size() != d.size()) throw InvalidSet("nonconvex_project: lattice point dimension mismatch");
        const double dist = (p - d).squaredNorm();
        if (best == nullptr || dist < best_dist || (dist == best_dist && lex_less(p, *best))) {
            best = &p;
            best_dist = dist;
        }
    }
    return *best;
}

}  // namespace detail

inline void validate(const ProjectionSet& set) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BoxSet> || std::is_same_v<T, HoleBoxSet>) {
                if (!(s.lo <= 0.0 && 0.0 <= s.hi)) throw InvalidSet("box bounds must bracket zero");
            }
            if constexpr (std::is_same_v<T, HoleBoxSet>) {
                if (!(s.dead_zone_radius >= 0.0)) throw InvalidSet("dead zone radius must be >= 0");
            } else if constexpr (std::is_same_v<T, SphereShellSet>) {
                if (!(0.0 <= s.r_inner && s.r_inner <= s.r_outer))
                    throw InvalidSet("sphere shell needs 0 <= r_inner <= r_outer");
            } else if constexpr (std::is_same_v<T, LatticeSet>) {
                if (s.points.empty()) throw InvalidSet("empty lattice");
                const bool has_zero = std::any_of(s.points.begin(), s.points.end(),
                                                  [](const Vector& p) { return p.isZero(0.0); });
                if (!has_zero) throw InvalidSet("lattice must contain the zero vector");
            }
        },
        set);
}

/// Member of the set nearest to d in Euclidean distance; ties go to the
/// lexicographically smallest candidate.
[[nodiscard]] inline Vector nonconvex_project(const Vector& d, const ProjectionSet& set) {
    validate(set);
    if (!d.allFinite()) throw InvalidInput("nonconvex_project: non-finite input");
    return std::visit([&d](const auto& s) { return detail::project(d, s); }, set);
}

}  // namespace znn
