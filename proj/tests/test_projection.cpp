#include "support.hpp"

using namespace znn;
using namespace znn::test;

namespace {

// Uniform samples of each set, used as the randomized optimality oracle.
Vector sample_member(SplitMix& rng, const ProjectionSet& set, Index n) {
    if (const auto* b = std::get_if<BoxSet>(&set)) return random_vector(rng, n, b->lo, b->hi);
    if (const auto* s = std::get_if<SphereShellSet>(&set)) {
        Vector dir = random_vector(rng, n);
        while (dir.norm() < 1e-3) dir = random_vector(rng, n);
        return dir.normalized() * rng.uniform(s->r_inner, s->r_outer);
    }
    if (const auto* h = std::get_if<HoleBoxSet>(&set)) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            double u;
            do u = rng.uniform(h->lo, h->hi);
            while (std::abs(u) < h->dead_zone_radius && rng.uniform() < 0.95);
            v[i] = std::abs(u) < h->dead_zone_radius ? 0.0 : u;
        }
        return v;
    }
    const auto& pts = std::get<LatticeSet>(set).points;
    return pts[static_cast<std::size_t>(rng.next() % pts.size())];
}

bool is_member(const Vector& v, const ProjectionSet& set) {
    const double tol = 1e-12;
    if (const auto* b = std::get_if<BoxSet>(&set)) return v.minCoeff() >= b->lo - tol && v.maxCoeff() <= b->hi + tol;
    if (const auto* s = std::get_if<SphereShellSet>(&set))
        return v.norm() == 0.0 || (v.norm() >= s->r_inner - tol && v.norm() <= s->r_outer + tol);
    if (const auto* h = std::get_if<HoleBoxSet>(&set)) {
        for (Index i = 0; i < v.size(); ++i)
            if (!(v[i] == 0.0 || (std::abs(v[i]) >= h->dead_zone_radius - tol && v[i] >= h->lo - tol &&
                                  v[i] <= h->hi + tol)))
                return false;
        return true;
    }
    for (const auto& p : std::get<LatticeSet>(set).points)
        if (p == v) return true;
    return false;
}

}  // namespace

TEST_CASE("nonconvex_project: spec examples") {
    const HoleBoxSet hb{-2.0, 2.0, 1.0};
    CHECK(nonconvex_project(Vector{{0.4}}, hb)[0] == 0.0);
    CHECK(nonconvex_project(Vector{{0.6}}, hb)[0] == 1.0);
    CHECK(nonconvex_project(Vector{{-0.6}}, hb)[0] == -1.0);
    CHECK(nonconvex_project(Vector{{3.0}}, hb)[0] == 2.0);
    const Vector member{{0.5, -0.25}};
    CHECK(nonconvex_project(member, BoxSet{-1, 1}) == member);
}

TEST_CASE("nonconvex_project: brute-force oracle on HoleBox") {
    const HoleBoxSet hb{-2.0, 2.0, 1.0};
    for (double d = -3.0; d <= 3.0; d += 0.01) {
        double best = 0.0;
        for (double c : {0.0, -1.0, 1.0, std::clamp(d, -2.0, 2.0)}) {
            if (c != 0.0 && std::abs(c) < 1.0) continue;
            if (std::abs(d - c) < std::abs(d - best) || (std::abs(d - c) == std::abs(d - best) && c < best)) best = c;
        }
        REQUIRE(nonconvex_project(Vector{{d}}, hb)[0] == best);
    }
}

TEST_CASE("nonconvex_project: ties break lexicographically") {
    CHECK(nonconvex_project(Vector{{0.5}}, HoleBoxSet{-2, 2, 1})[0] == 0.0);  // 0 < 1
    CHECK(nonconvex_project(Vector{{-0.5}}, HoleBoxSet{-2, 2, 1})[0] == -1.0);  // -1 < 0
    LatticeSet lat{{Vector{{0.0, 0.0}}, Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}}};
    CHECK(nonconvex_project(Vector{{0.5, 0.5}}, lat) == Vector{{0.0, 0.0}});
    CHECK(nonconvex_project(Vector{{0.6, 0.6}}, lat) == Vector{{0.0, 1.0}});
    CHECK(nonconvex_project(Vector{{0.5, 0.0}}, SphereShellSet{1.0, 2.0}) == Vector{{0.0, 0.0}});
}

TEST_CASE("nonconvex_project: invalid sets") {
    CHECK_THROWS_AS(nonconvex_project(Vector{{1.0}}, LatticeSet{}), InvalidSet);
    CHECK_THROWS_AS(nonconvex_project(Vector{{1.0}}, LatticeSet{{Vector{{1.0}}}}), InvalidSet);
    CHECK_THROWS_AS(nonconvex_project(Vector{{1.0}}, BoxSet{0.5, 1.0}), InvalidSet);
    CHECK_THROWS_AS(nonconvex_project(Vector{{1.0}}, SphereShellSet{2.0, 1.0}), InvalidSet);
}

TEST_CASE("nonconvex_project: membership, randomized optimality, idempotence (property)") {
    SplitMix rng(2024);
    std::vector<ProjectionSet> sets = {BoxSet{-1.0, 2.0}, SphereShellSet{1.0, 2.0}, SphereShellSet{0.0, 0.5},
                                       HoleBoxSet{-2.0, 1.5, 0.7}};
    LatticeSet lattice;
    lattice.points.push_back(Vector::Zero(3));
    for (int i = 0; i < 40; ++i) lattice.points.push_back(random_vector(rng, 3, -2, 2));
    sets.push_back(lattice);

    for (const auto& set : sets) {
        for (int trial = 0; trial < 30; ++trial) {
            const Vector d = random_vector(rng, 3, -3, 3);
            const Vector p = nonconvex_project(d, set);
            REQUIRE(is_member(p, set));
            const double dist = (p - d).norm();
            for (int s = 0; s < 1000; ++s) REQUIRE(dist <= (sample_member(rng, set, 3) - d).norm() + 1e-12);
            REQUIRE((nonconvex_project(p, set) - p).norm() <= 1e-12);
        }
    }
}
