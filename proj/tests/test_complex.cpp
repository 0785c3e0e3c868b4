#include "support.hpp"

using namespace znn;
using namespace znn::test;

TEST_CASE("complex model: ground truth and real embedding") {
    const auto m = make_complex_synthetic(3, 5);
    const auto real = real_embedding(m);
    REQUIRE(real.state_dim == 6);
    for (double t : {0.0, 0.7, 2.5}) {
        const Vector x = ComplexLinearModel::to_real(m.ground_truth(t));
        CHECK(m.residual_norm(x, t) < 1e-12);
        CHECK(eval_error(real, x, t).norm() < 1e-12);
        CHECK((real.ground_truth(t) - x).norm() == 0.0);
    }
    SplitMix rng(1);
    const Vector x = random_vector(rng, 6);
    CHECK(std::abs(m.residual_norm(x, 1.0) - eval_error(real, x, 1.0).norm()) < 1e-12);
    CHECK_THROWS_AS(make_complex_synthetic(0, 1), InvalidInput);
}

TEST_CASE("complex model: RealImag rhs equals the embedded real model") {
    auto m = make_complex_synthetic(3, 9);
    m.schedule = ConstantScale{4.0};
    m.activation = SignBiPower{0.5};
    m.method = ComplexActivationMethod::RealImag;
    const auto real = assemble(real_embedding(m), OZNN{4.0, SignBiPower{0.5}});
    SplitMix rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const double t = rng.uniform(0.0, 3.0);
        const Vector x = random_vector(rng, 6, -2, 2);
        const Vector a = m.rhs(x, Vector(), t).xdot;
        const Vector b = model_rhs(real, x, Vector(), t).xdot;
        REQUIRE((a - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
    }
}

TEST_CASE("complex model: both methods converge to the ground truth") {
    for (auto act : std::vector<ActivationSpec>{Linear{}, PowerSigmoid{}, SignBiPower{0.5}}) {
        auto native = make_complex_synthetic(3, 5);
        native.schedule = ConstantScale{10.0};
        native.activation = act;
        native.method = ComplexActivationMethod::ModulusArgument;
        const auto real = assemble(real_embedding(native), OZNN{10.0, act});
        const Vector x0 = Vector::Zero(6);
        const auto a = integrate_reference(native, x0, 3.0, 1e-10);
        const auto b = integrate_reference(real, x0, 3.0, 1e-10);
        const Vector truth = ComplexLinearModel::to_real(native.ground_truth(3.0));
        CHECK((a.states.back() - truth).norm() < 1e-6);
        CHECK((b.states.back() - truth).norm() < 1e-6);
        if (std::holds_alternative<Linear>(act))
            for (std::size_t i = 0; i < a.size(); ++i) REQUIRE((a.states[i] - b.states[i]).norm() < 1e-10);
    }
}

TEST_CASE("complex model: discrete schemes run on the native model") {
    auto m = make_complex_synthetic(2, 4);
    m.schedule = ConstantScale{20.0};
    for (auto kind : kAllSchemes) {
        const auto traj = solve_discrete(m, Vector::Zero(4), Scheme{kind, 1e-3, false}, 2000);
        INFO(to_string(kind));
        CHECK(traj.residual_norms.back() < 1e-2);  // O(eta) schemes
    }
    CHECK_THROWS_AS(m.rhs(Vector::Zero(4), Vector::Zero(1), 0.0), InvalidInput);
}
