#include "support.hpp"

using namespace znn;
using namespace znn::test;
using Catch::Approx;

namespace {

Trajectory synthetic_decay(double rate, double horizon = 5.0, std::size_t n = 501) {
    Trajectory traj;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(n - 1);
        traj.push(t, Vector::Zero(1), Vector(), std::exp(-rate * t));
    }
    return traj;
}

}  // namespace

TEST_CASE("fit_convergence_rate: exact exponential input") {
    const auto rep = fit_convergence_rate(synthetic_decay(3.0));
    REQUIRE(rep.rate);
    CHECK(*rep.rate == Approx(3.0).margin(0.01));
    CHECK(rep.exponential);
    CHECK(rep.r_squared == Approx(1.0).margin(1e-12));
    REQUIRE(rep.time_to_tolerance[0]);
    CHECK(*rep.time_to_tolerance[0] == Approx(std::log(100.0) / 3.0).epsilon(1e-9));
    CHECK(*rep.time_to_tolerance[2] == Approx(std::log(1e6) / 3.0).epsilon(1e-9));
}

TEST_CASE("fit_convergence_rate: errors") {
    Trajectory zero;
    for (int k = 0; k < 30; ++k) zero.push(k, Vector::Zero(1), Vector(), 0.0);
    CHECK_THROWS_AS(fit_convergence_rate(zero), NothingToFit);
    CHECK_THROWS_AS(fit_convergence_rate(Trajectory{}), NothingToFit);
    CHECK_THROWS_AS(fit_convergence_rate(synthetic_decay(3.0, 5.0, 10)), InvalidInput);
}

TEST_CASE("fit_convergence_rate: recovers gamma from reference runs") {
    const auto p = make_synthetic(ProblemKind::LinearSystem, 4, 7);
    const Vector x0 = perturbed_start(p, 1.0, 7);
    for (double gamma : {1.0, 5.0, 10.0, 50.0}) {
        const auto m = assemble(p, OZNN{gamma, Linear{}});
        ReferenceOptions opts;
        opts.samples = 400;
        const auto traj = integrate_reference(m, x0, 12.0 / gamma, 1e-9, opts);
        const auto rep = fit_convergence_rate(traj);
        REQUIRE(rep.rate);
        CHECK(*rep.rate == Approx(gamma).epsilon(0.05));
    }
}

TEST_CASE("fit_convergence_rate: FTZNN sign-bi-power is not exponential") {
    const auto m = assemble(scalar_linear(1.0, 0.0), FTZNN{1.0, 1.0, 1.0, 5, 3, SignBiPower{0.5}});
    ReferenceOptions opts;
    opts.samples = 2001;
    const auto traj = integrate_reference(m, Vector{{10.0}}, 6.0, 1e-10, opts);
    const auto rep = fit_convergence_rate(traj);
    CHECK(rep.r_squared < kExponentialR2);
    CHECK_FALSE(rep.exponential);
    CHECK_FALSE(rep.rate);
}

TEST_CASE("noise_sweep: closed-form rows") {
    const auto p = scalar_linear(2.0, 1.0);
    const std::vector<NamedFormula> formulas = {{"OZNN", OZNN{10.0, Linear{}}}, {"NTZNN", NTZNN{10.0, 10.0}}};
    SweepOptions opts;
    opts.horizon = 10.0;
    opts.tol = 1e-10;
    opts.x0 = Vector::Constant(1, 0.5);
    opts.jobs = 2;
    const std::vector<double> mags = {0.0, 1.0, 5.0, 10.0};
    const auto table = noise_sweep(p, formulas, mags, opts);
    REQUIRE(table.residual.size() == 2);
    CHECK(table.residual[0][0] <= 1e-12);
    for (std::size_t j = 1; j < mags.size(); ++j) {
        CHECK(table.residual[0][j] == Approx(mags[j] / 10.0).epsilon(0.01));
        CHECK(table.residual[1][j] < 1e-4);
    }
    opts.jobs = 1;
    const auto serial = noise_sweep(p, formulas, mags, opts);
    CHECK(to_csv(serial) == to_csv(table));
    CHECK(to_markdown(table).find("| NTZNN |") != std::string::npos);
    CHECK(to_csv(table).rfind("formula,0,1,5,10\n", 0) == 0);

    CHECK_THROWS_AS(noise_sweep(p, {formulas[0]}, mags, opts), InvalidInput);
    CHECK_THROWS_AS(noise_sweep(p, formulas, {1.0}, opts), InvalidInput);
}

TEST_CASE("order_report: smooth DQM and static problem") {
    const auto m = assemble(make_synthetic(ProblemKind::DQM, 4, 3), OZNN{10.0, Linear{}});
    OrderReportOptions opts;
    opts.jobs = 2;
    const auto rows = order_report(m, {SchemeKind::EulerForward, SchemeKind::TaylorZTD}, opts);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].order);
    CHECK((*rows[0].order >= 0.8 && *rows[0].order <= 1.2));
    REQUIRE(rows[1].order);
    CHECK((*rows[1].order >= 1.7 && *rows[1].order <= 2.3));
    CHECK(rows[0].samples.size() == 5);

    const auto still = assemble(scalar_linear(2.0, 1.0), OZNN{10.0, Linear{}});
    const auto exact = order_report(still, std::vector<SchemeKind>(kAllSchemes.begin(), kAllSchemes.end()), opts);
    for (const auto& row : exact) {
        CHECK(row.exact);
        CHECK_FALSE(row.order);
    }
    CHECK(to_markdown(exact).find("exact") != std::string::npos);
    opts.halvings = 2;
    CHECK_THROWS_AS(order_report(still, {SchemeKind::RK4}, opts), InvalidInput);
}

TEST_CASE("parallel_for: covers every index and rethrows the first failure") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 30) throw InvalidInput("index " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()) == "index 7");
    }
}
