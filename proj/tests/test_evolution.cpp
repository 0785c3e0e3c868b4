#include "support.hpp"

using namespace znn;
using namespace znn::test;
using Catch::Approx;

TEST_CASE("scale_value: spec examples") {
    CHECK(scale_value(3.0, ConstantScale{10.0}) == 10.0);
    CHECK(scale_value(0.0, PowerRampScale{1.0, 2.0}) == 1.0);
    CHECK(scale_value(3.0, PowerRampScale{2.0, 2.0}) == Approx(20.0));
    CHECK_THROWS_AS(scale_value(-1.0, ConstantScale{1.0}), InvalidInput);
}

TEST_CASE("scale_value: PowerRamp positive and non-decreasing (property)") {
    SplitMix rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const PowerRampScale s{rng.uniform(0.1, 10.0), rng.uniform(0.1, 4.0)};
        double prev = 0.0;
        for (double t = 0.0; t < 10.0; t += 0.05) {
            const double v = scale_value(t, s);
            REQUIRE(v > 0.0);
            REQUIRE(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("evolution_rhs: spec examples") {
    const auto oz = evolution_rhs(Vector{{0.5}}, Vector(), 0.0, OZNN{10.0, Linear{}});
    CHECK(oz.edot[0] == Approx(-5.0));
    CHECK(oz.auxdot.size() == 0);

    const auto nt = evolution_rhs(Vector{{0.0}}, Vector{{0.0}}, 0.0, NTZNN{1.0, 1.0});
    CHECK(nt.edot[0] == 0.0);
    CHECK(nt.auxdot[0] == 0.0);

    const auto ft = evolution_rhs(Vector{{1.0}}, Vector(), 0.0, FTZNN{1.0, 1.0, 1.0, 3, 3, Linear{}});
    CHECK(ft.edot[0] == Approx(-2.0));
}

TEST_CASE("evolution_rhs: Table 1 forms") {
    const Vector e{{0.3, -2.0}};
    const Vector aux{{0.1, 0.4}};
    const auto vp = evolution_rhs(e, Vector(), 2.0, VPZNN{PowerRampScale{1.5, 2.0}, Linear{}});
    CHECK((vp.edot - (-1.5 * 5.0) * e).norm() < 1e-14);

    const auto nt = evolution_rhs(e, aux, 0.0, NTZNN{3.0, 2.0});
    CHECK((nt.edot - (-3.0 * e - 2.0 * aux)).norm() < 1e-14);
    CHECK(nt.auxdot == e);

    const ActivatedNTZNN an{2.0, 3.0, SignBiPower{0.5}, PowerSigmoid{}};
    const auto a = evolution_rhs(e, aux, 0.0, an);
    const Vector p1 = activate(e, an.psi1);
    CHECK((a.edot - (-2.0 * p1 - 3.0 * activate(Vector(e + 2.0 * aux), an.psi2))).norm() < 1e-14);
    CHECK(a.auxdot == p1);

    const FTZNN ft{2.0, 1.5, 0.5, 5, 3, SignBiPower{0.5}};
    const auto f = evolution_rhs(e, Vector(), 0.0, ft);
    for (Index i = 0; i < 2; ++i) {
        const double u = e[i];
        const double frac = (u < 0 ? -1.0 : 1.0) * std::pow(std::abs(u), 5.0 / 3.0);
        CHECK(f.edot[i] == Approx(-2.0 * activate_scalar(1.5 * u + 0.5 * frac, ft.activation)));
    }

    const auto np = evolution_rhs(Vector{{0.4, 0.6}}, Vector(), 0.0, NPZNN{2.0, HoleBoxSet{-2, 2, 1}});
    CHECK(np.edot == Vector{{0.0, -2.0}});
}

TEST_CASE("evolution_rhs: errors") {
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector(), 0.0, NTZNN{1.0, 1.0}), InvalidInput);
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector{{0.0}}, 0.0, OZNN{1.0, Linear{}}), InvalidInput);
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector(), 0.0, FTZNN{1.0, 1.0, 1.0, 4, 3, Linear{}}), InvalidSpec);
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector(), 0.0, FTZNN{1.0, 1.0, 1.0, 5, 2, Linear{}}), InvalidSpec);
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector(), 0.0, OZNN{0.0, Linear{}}), InvalidSpec);
    CHECK_THROWS_AS(evolution_rhs(Vector{{1.0}}, Vector{{1.0}}, 0.0, NTZNN{1.0, -1.0}), InvalidSpec);
}

TEST_CASE("evolution_rhs: FTZNN odd in e and OZNN linear exact (property)") {
    SplitMix rng(77);
    for (const auto& act : all_activations()) {
        for (int bc : {0, 1, 2}) {
            const int b = std::array{3, 5, 7}[bc];
            const FTZNN ft{rng.uniform(0.5, 5), rng.uniform(0.5, 5), rng.uniform(0.5, 5), b, 3, act};
            for (int trial = 0; trial < 50; ++trial) {
                const Vector e = random_vector(rng, 5, -3, 3);
                const Vector plus = evolution_rhs(e, Vector(), 0.0, ft).edot;
                const Vector minus = evolution_rhs(Vector(-e), Vector(), 0.0, ft).edot;
                REQUIRE((plus + minus).cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double gamma = rng.uniform(0.1, 100);
        const Vector e = random_vector(rng, 6, -10, 10);
        const Vector out = evolution_rhs(e, Vector(), 0.0, OZNN{gamma, Linear{}}).edot;
        REQUIRE((out + gamma * e).cwiseAbs().maxCoeff() <= 1e-15 * gamma * e.cwiseAbs().maxCoeff());
    }
}
