#include "support.hpp"

using namespace znn;
using namespace znn::test;
using Catch::Approx;

TEST_CASE("model_rhs: spec examples") {
    const auto m = assemble(scalar_dqm(2.0, 2.0), OZNN{1.0, Linear{}});
    const auto r = model_rhs(m, Vector{{0.0}}, Vector(), 0.0);
    CHECK(r.xdot[0] == Approx(1.0).epsilon(1e-15));

    const auto p = make_synthetic(ProblemKind::LinearSystem, 3, 4);
    TimeVaryingOperator A{p.op("A").value, {}, 3, 3};
    const Matrix A0 = A.value(0.0);
    const Vector xs{{0.3, -1.0, 2.0}};
    const auto ls = make_problem(ProblemKind::LinearSystem,
                                 {{"A", constant_operator(A0)}, {"b", constant_operator(Matrix(A0 * xs))}});
    const auto eq = model_rhs(assemble(ls, OZNN{5.0, PowerSigmoid{}}), xs, Vector(), 1.0);
    CHECK(eq.xdot.norm() < 1e-14);
}

TEST_CASE("model_rhs: satisfies J xdot = F(e) - de/dt (property)") {
    SplitMix rng(8);
    const std::vector<EvolutionSpec> formulas = {OZNN{3.0, SignBiPower{}}, VPZNN{PowerRampScale{2.0, 1.0}, Linear{}},
                                                 NTZNN{4.0, 2.0}, FTZNN{2.0, 1.0, 1.0, 5, 3, PowerSigmoid{}},
                                                 ActivatedNTZNN{2.0, 1.0, SignBiPower{}, Linear{}}};
    for (auto kind : kAllProblemKinds) {
        if (kind == ProblemKind::LinearEqAndIneq) continue;  // rectangular: least squares
        const auto p = make_synthetic(kind, is_matrix_kind(kind) ? 2 : 3, 6);
        for (const auto& f : formulas) {
            const auto m = assemble(p, f);
            const double t = rng.uniform(0.0, 3.0);
            const Vector x = p.ground_truth(t) + random_vector(rng, p.state_dim, -0.2, 0.2);
            const Vector aux = random_vector(rng, m.aux_dim());
            const auto r = model_rhs(m, x, aux, t);
            const Vector e = eval_error(p, x, t);
            const auto target = evolution_rhs(e, aux, t, f);
            const Vector lhs = eval_jacobian(p, x, t) * r.xdot;
            const Vector rhs = target.edot - eval_time_partial(p, x, t);
            REQUIRE((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
            REQUIRE(r.auxdot == target.auxdot);
        }
    }
}

TEST_CASE("solve_jacobian: paths and SingularJacobian") {
    const auto lu = solve_jacobian(Matrix::Identity(2, 2), Vector{{1.0, 2.0}}, 0.0);
    CHECK(lu.path == SolvePath::LU);

    Matrix ill = Matrix::Identity(2, 2);
    ill(1, 1) = 1e-10;
    const auto ridge = solve_jacobian(ill, Vector{{1.0, 0.0}}, 0.0);
    CHECK(ridge.path == SolvePath::RidgeLeastSquares);
    CHECK(ridge.solution[0] == Approx(1.0).epsilon(1e-9));

    Matrix singular{{1.0, 2.0}, {2.0, 4.0}};
    try {
        (void)solve_jacobian(singular, Vector{{1.0, 1.0}}, 0.25);
        FAIL("expected SingularJacobian");
    } catch (const SingularJacobian& e) {
        CHECK(e.time() == 0.25);
        CHECK(e.condition() > kSingularCondition);
    }
    const auto m = assemble(scalar_dqm(0.0, 1.0), OZNN{1.0, Linear{}});
    CHECK_THROWS_AS(model_rhs(m, Vector{{0.0}}, Vector(), 0.0), SingularJacobian);
}

TEST_CASE("assemble: rejects invalid formulas") {
    CHECK_THROWS_AS(assemble(scalar_dqm(1.0, 1.0), OZNN{-1.0, Linear{}}), InvalidSpec);
    CHECK_THROWS_AS(assemble(scalar_dqm(1.0, 1.0), FTZNN{1.0, 1.0, 1.0, 4, 3, Linear{}}), InvalidSpec);
}
