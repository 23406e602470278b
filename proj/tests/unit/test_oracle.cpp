#include "fixtures.hpp"

#include "irmc/errors.hpp"
#include "irmc/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace irmc;
using namespace irmc::test;

TEST_SUITE("oracle") {

TEST_CASE("federico thresholds") {
    const FedericoSolution s = federico_solution(0.08, -0.07, 0.25, 0.5, -1.0, -10.0);
    CHECK(s.s == doctest::Approx(8.749).epsilon(5e-4));
    CHECK(s.S == doctest::Approx(56.99).epsilon(5e-4));
    CHECK(s.C == doctest::Approx(1.0 / 0.1228125).epsilon(1e-14));
    const double a = 0.5 - (-0.07) / (0.25 * 0.25);
    CHECK(s.m == doctest::Approx(a - std::sqrt(a * a + 2.0 * 0.08 / (0.25 * 0.25))).epsilon(1e-14));
}

TEST_CASE("federico solution satisfies its defining equations") {
    const FedericoSolution s = federico_solution(0.08, -0.07, 0.25, 0.5, -1.0, -10.0);
    // Smooth fit at both thresholds and value matching across the impulse.
    CHECK(std::abs(s.dv_continuation(s.s) + s.c0) < 1e-8);
    CHECK(std::abs(s.dv_continuation(s.S) + s.c0) < 1e-8);
    CHECK(std::abs(s.v_continuation(s.s) - (s.v_continuation(s.S) + s.c0 * (s.S - s.s) + s.c1)) < 1e-8);
    // m solves the characteristic equation of the generator.
    const double q = 0.5 * s.sigma * s.sigma * s.m * (s.m - 1.0) + s.mu * s.m - s.r;
    CHECK(std::abs(q) < 1e-12);
    // Below s the value is the impulse branch.
    CHECK(s.v(5.0) == doctest::Approx(s.v(s.S) + s.c0 * (s.S - 5.0) + s.c1));
    CHECK(s.v(50.0) == doctest::Approx(s.v_continuation(50.0)));
}

TEST_CASE("federico parameter guards") {
    CHECK_THROWS_AS(federico_solution(0.08, -0.07, 0.25, 1.0, -1.0, -10.0), InvalidParameters);
    CHECK_THROWS_AS(federico_solution(-0.01, -0.07, 0.25, 0.5, -1.0, -10.0), InvalidParameters);
    CHECK_THROWS_AS(federico_solution(0.08, -0.07, 0.0, 0.5, -1.0, -10.0), InvalidParameters);
    const FedericoSolution other = federico_solution(0.16, -0.07, 0.25, 0.5, -1.0, -10.0);
    CHECK(std::isfinite(other.s));
    CHECK(std::isfinite(other.S));
    CHECK(other.S != doctest::Approx(56.99).epsilon(0.01));
}

TEST_CASE("gauss-hermite rule integrates normal moments") {
    Eigen::VectorXd x, w;
    gauss_hermite_normal(256, x, w);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(w.dot(x)) < 1e-12);
    CHECK(w.dot(x.cwiseProduct(x)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w.dot(x.array().pow(4).matrix()) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(w.dot((0.3 * x.array()).exp().matrix()) == doctest::Approx(std::exp(0.045)).epsilon(1e-12));
}

TEST_CASE("dynamic programming without impulses matches the closed form") {
    const auto m = inert_gbm();
    DpGrid g;
    g.lo = 0.5;
    g.hi = 500.0;
    g.n = 400;
    g.log_spacing = true;
    const DpResult dp = brute_force_dp(*m, g);
    for (double x : {10.0, 30.0, 50.0}) CHECK(dp.value_at(0, x) == doctest::Approx(inert_value(*m, x)).epsilon(1e-3));
    CHECK(dp.act.sum() == 0);
}

TEST_CASE("dynamic programming on the federico preset") {
    const ImpulseModel m = make_federico_model();
    DpGrid g;
    g.lo = 1.0;
    g.hi = 90.0;
    g.n = 400;
    const DpResult dp = brute_force_dp(m, g);
    CHECK(dp.steps() == 100);
    CHECK(dp.value.rows() == 101);
    for (int k : {0, 50, 99})
        for (int i = 1; i < g.n; ++i) CHECK(dp.value(k, i) >= dp.value(k, i - 1) - 1e-9);
    // Mid-horizon trigger near the stationary one.
    CHECK(dp.boundary(30, Direction::Up) == doctest::Approx(8.749).epsilon(0.1));

    DpGrid coarse = g;
    coarse.n = 200;
    const double fine = dp.value_at(0, 50.0);
    CHECK(brute_force_dp(m, coarse).value_at(0, 50.0) == doctest::Approx(fine).epsilon(2e-3));
}

TEST_CASE("dynamic programming guards") {
    DpGrid g;
    CHECK_THROWS_AS(brute_force_dp(make_guthrie_model(), g), UnsupportedDimension);
    g.lo = 2.0;
    g.hi = 1.0;
    CHECK_THROWS_AS(brute_force_dp(make_federico_model(), g), InvalidParameters);
}

}
