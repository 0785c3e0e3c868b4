#include "support.hpp"

using namespace znn;
using namespace znn::test;
using Catch::Approx;

namespace {

std::vector<StatePoint> constant_history(const Vector& x, Index aux_dim, std::size_t count = 3) {
    return std::vector<StatePoint>(count, StatePoint{x, Vector::Zero(aux_dim)});
}

}  // namespace

TEST_CASE("step: spec examples") {
    const auto dqm = assemble(scalar_dqm(2.0, 2.0), OZNN{1.0, Linear{}});
    const auto h = constant_history(Vector{{0.0}}, 0, 1);
    CHECK(step(dqm, Scheme{SchemeKind::EulerForward, 0.1, false}, h, 0).x[0] == Approx(0.1).epsilon(1e-15));

    // e = x, b = 0, gamma = 1: xdot = -x.
    const auto decay = assemble(scalar_linear(1.0, 0.0), OZNN{1.0, Linear{}});
    const auto one = constant_history(Vector{{1.0}}, 0, 1);
    const double rk4 = step(decay, Scheme{SchemeKind::RK4, 0.1, false}, one, 0).x[0];
    CHECK(rk4 == Approx(0.90483750).margin(5e-9));
    CHECK(std::abs(rk4 - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("step: fixed point at the exact solution for every scheme") {
    // Linear activations: SignBiPower amplifies round-off in e near zero.
    const std::vector<EvolutionSpec> formulas = {OZNN{10.0, Linear{}}, NTZNN{5.0, 5.0}};
    for (auto kind : kAllProblemKinds) {
        const auto p0 = make_synthetic(kind, is_matrix_kind(kind) ? 2 : 3, 3);
        // Freeze the operators at t = 0 to get a time-invariant instance.
        std::map<std::string, TimeVaryingOperator> frozen;
        for (const auto& [name, op] : p0.operators) frozen[name] = constant_operator(Matrix(op.value(0.0)));
        const auto p = make_problem(kind, frozen, [g = p0.ground_truth](double) { return g(0.0); });
        const Vector xs = p.ground_truth(0.0);
        for (const auto& f : formulas) {
            const auto m = assemble(p, f);
            for (auto scheme : kAllSchemes)
                for (bool strict : {false, true}) {
                    const auto h = constant_history(xs, m.aux_dim());
                    const auto next = step(m, Scheme{scheme, 1e-2, strict}, h, 7);
                    REQUIRE((next.x - xs).cwiseAbs().maxCoeff() <= 1e-12);
                    REQUIRE(next.aux.norm() <= 1e-12);
                }
        }
    }
}

TEST_CASE("step: NeedsWarmup and invalid gap") {
    const auto m = assemble(scalar_linear(1.0, 1.0), OZNN{});
    const auto h = constant_history(Vector{{1.0}}, 0, 2);
    CHECK_THROWS_AS(step(m, Scheme{SchemeKind::ThreeStep, 0.1, false}, h, 2), NeedsWarmup);
    CHECK_THROWS_AS(step(m, Scheme{SchemeKind::TaylorZTD, 0.1, false}, h, 2), NeedsWarmup);
    CHECK_THROWS_AS(step(m, Scheme{SchemeKind::EulerForward, 0.0, false}, h, 2), InvalidInput);
}

TEST_CASE("solve_discrete: base case, convergence and determinism") {
    const auto p = make_synthetic(ProblemKind::LinearSystem, 4, 12);
    const auto m = assemble(p, OZNN{100.0, Linear{}});
    const Vector x0 = perturbed_start(p, 1.0, 2);
    for (auto kind : kAllSchemes) {
        const Scheme s{kind, 1e-3, false};
        const auto one = solve_discrete(m, x0, s, 1);
        std::vector<StatePoint> h{{x0, Vector()}};
        const Scheme first{history_needed(kind) > 1 ? SchemeKind::EulerForward : kind, 1e-3, false};
        REQUIRE(one.size() == 2);
        REQUIRE(one.states[1] == step(m, first, h, 0).x);
    }
    const auto traj = solve_discrete(m, x0, Scheme{SchemeKind::EulerForward, 1e-3, false}, 5000);
    CHECK(traj.residual_norms.back() < 1e-3);
    CHECK(traj.times.back() == Approx(5.0));
    const auto again = solve_discrete(m, x0, Scheme{SchemeKind::EulerForward, 1e-3, false}, 5000);
    CHECK(to_csv(traj) == to_csv(again));
    CHECK_THROWS_AS(solve_discrete(m, x0, Scheme{}, 0), InvalidInput);
}

TEST_CASE("solve_discrete: EulerForward equals the closed-form DQM update") {
    SplitMix seeds(99);
    for (int instance = 0; instance < 5; ++instance) {
        const auto p = make_synthetic(ProblemKind::DQM, 3, seeds.next());
        const auto m = assemble(p, OZNN{7.0, Linear{}});
        const double eta = 1e-2;
        const auto traj = solve_discrete(m, perturbed_start(p, 0.3, 1), Scheme{SchemeKind::EulerForward, eta, false}, 50);
        for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
            const double t = traj.times[k];
            const Matrix A = p.op("A").value(t), Ap = p.op("A").value(t - eta);
            const Vector b = p.op("b").value(t), bp = p.op("b").value(t - eta);
            const Vector& x = traj.states[k];
            const Vector expected = x - A.lu().solve(Vector((A - Ap) * x - (b - bp) + eta * 7.0 * (A * x - b)));
            REQUIRE((traj.states[k + 1] - expected).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.norm()));
        }
    }
}

TEST_CASE("empirical_order: ratios on synthetic DQM") {
    const auto p = make_synthetic(ProblemKind::DQM, 4, 3);
    const auto m = assemble(p, OZNN{10.0, Linear{}});
    const std::vector<double> gaps = {4e-3, 2e-3, 1e-3, 5e-4};
    OrderOptions opts;
    opts.horizon = 10.0;
    auto ratios = [&](SchemeKind kind) {
        const auto samples = empirical_order(m, kind, gaps, opts);
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i)
            out.push_back(samples[i].steady_residual / samples[i + 1].steady_residual);
        return out;
    };
    for (double r : ratios(SchemeKind::EulerForward)) CHECK((r >= 1.6 && r <= 2.4));
    for (double r : ratios(SchemeKind::TaylorZTD)) CHECK((r >= 3.2 && r <= 4.8));

    const std::vector<double> bad = {4e-3, 3e-3, 1e-3};
    CHECK_THROWS_AS(empirical_order(m, SchemeKind::EulerForward, bad, opts), InvalidInput);

    const auto still = assemble(scalar_linear(2.0, 1.0), OZNN{10.0, Linear{}});
    for (const auto& s : empirical_order(still, SchemeKind::EulerForward, std::vector<double>{4e-2, 2e-2, 1e-2}))
        CHECK(s.steady_residual <= 1e-12);
}

TEST_CASE("step: strict mode never samples after t_k (predict-manner audit)") {
    const auto log = std::make_shared<SampleLog>();
    const auto base = make_synthetic(ProblemKind::SylvesterEquation, 2, 5);
    for (const auto& f : std::vector<EvolutionSpec>{OZNN{10.0, Linear{}}, NTZNN{5.0, 5.0}}) {
        const auto m = assemble(instrument(base, log), f);
        for (auto kind : kAllSchemes) {
            const double eta = 1e-2;
            std::vector<StatePoint> h = constant_history(perturbed_start(base, 0.1, 3), m.aux_dim());
            for (long k = 2; k < 40; ++k) {
                log->clear();
                const auto next = step(m, Scheme{kind, eta, true}, h, k);
                const double tk = static_cast<double>(k) * eta;
                REQUIRE(log->latest().has_value());
                REQUIRE(*log->latest() <= tk);
                h.insert(h.begin(), next);
                h.pop_back();
            }
        }
    }
}

TEST_CASE("step: non-strict EulerBackward and RK4 read ahead") {
    const auto log = std::make_shared<SampleLog>();
    const auto m = assemble(instrument(make_synthetic(ProblemKind::LinearSystem, 2, 1), log), OZNN{});
    const auto h = constant_history(Vector::Zero(2), 0, 1);
    for (auto kind : {SchemeKind::EulerBackward, SchemeKind::RK4}) {
        log->clear();
        (void)step(m, Scheme{kind, 0.1, false}, h, 3);
        CHECK(*log->latest() > 0.3);
    }
}

TEST_CASE("solve_discrete: failures carry the step index") {
    TimeVaryingOperator A{[](double t) { return Matrix::Constant(1, 1, 1.0 - t); },
                          [](double) { return Matrix::Constant(1, 1, -1.0); }, 1, 1};
    const auto p = make_problem(ProblemKind::LinearSystem, {{"A", A}, {"b", constant_operator(Matrix::Ones(1, 1))}});
    const auto m = assemble(p, OZNN{});
    try {
        (void)solve_discrete(m, Vector{{1.0}}, Scheme{SchemeKind::EulerForward, 0.25, false}, 10);
        FAIL("expected StepFailure");
    } catch (const StepFailure& e) {
        CHECK(e.step_index() == 4);
        try {
            std::rethrow_if_nested(e);
            FAIL("expected a nested cause");
        } catch (const SingularJacobian& inner) {
            CHECK(inner.time() == 1.0);
        }
    }
}
