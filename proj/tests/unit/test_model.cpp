#include "irmc/errors.hpp"
#include "irmc/model.hpp"
#include "irmc/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace irmc;

TEST_SUITE("model") {

TEST_CASE("federico preset parameters") {
    const ImpulseModel m = make_federico_model();
    CHECK(m.discount_rate == 0.08);
    CHECK(m.vol(make_state(50.0))(0) == doctest::Approx(12.5).epsilon(1e-14));
    CHECK(m.steps() == 100);
    CHECK(m.impulse_set.direction == Direction::Up);
    CHECK(m.running_reward(make_state(4.0)) == doctest::Approx(4.0));  // 2 sqrt(x)
}

TEST_CASE("federico terminal value is C x^gamma / gamma") {
    const ImpulseModel m = make_federico_model();
    const double c = 1.0 / (0.08 - (-0.07) * 0.5 + 0.5 * 0.5 * 0.5 * 0.25 * 0.25);
    CHECK(c == doctest::Approx(1.0 / 0.1228125).epsilon(1e-14));
    CHECK(m.terminal_value(make_state(25.0)) == doctest::Approx(10.0 * c).epsilon(1e-13));
}

TEST_CASE("linear affine cost is exact and state independent") {
    const ImpulseModel m = make_federico_model();
    for (double x : {1.0, 8.0, 70.0}) {
        CHECK(m.impulse_cost(make_state(x), make_state(0.0)) == 0.0);
        CHECK(m.impulse_cost(make_state(x), make_state(30.0)) == -1.0 * 30.0 - 10.0);
    }
}

TEST_CASE("faustmann costs and terminal value") {
    const ImpulseModel m = make_faustmann_model();
    const State x = make_state(1.9);
    CHECK(m.impulse_cost(x, make_state(-1.0)) == 0.0);
    CHECK(m.impulse_cost(x, make_state(-1.84)) == doctest::Approx(0.84).epsilon(1e-14));
    CHECK(m.impulse_cost(x, make_state(0.0)) == 0.0);
    for (double v : {-0.2, 0.0, 1.5, 2.4}) CHECK(m.terminal_value(make_state(v)) == 0.0);
    CHECK(m.steps() == 50);
    REQUIRE(m.target_state);
    CHECK((*m.target_state)(0) == 0.0);
}

TEST_CASE("guthrie reward, roa and controllable coordinate") {
    const ImpulseModel m = make_guthrie_model();
    CHECK(m.running_reward(make_state(1.0, 1.0)) == 1.0);
    CHECK(guthrie_roa(make_state(2.0, 100.0), 0.5, 0.95) == doctest::Approx(2.0 * std::pow(100.0, -0.45)));
    CHECK(m.impulse_set.controllable == std::vector<int>{1});
    CHECK(m.impulse_cost(m.x0, make_state(0.0, 100.0)) == doctest::Approx(-std::pow(100.0, 0.95)));
}

TEST_CASE("guthrie terminal perpetuity") {
    GuthrieParams p;
    p.terminal_decay = 0.0;
    const ImpulseModel plain = make_guthrie_model(p);
    CHECK(plain.terminal_value(make_state(2.0, 9.0)) == doctest::Approx(2.0 * 3.0 / 0.04));
    const ImpulseModel decayed = make_guthrie_model();
    CHECK(decayed.terminal_value(make_state(2.0, 9.0)) == doctest::Approx(2.0 * 3.0 / (0.04 + 0.5 * 0.1)));
}

TEST_CASE("built-in models give finite values on random states") {
    Stream s(42);
    for (const ImpulseModel& m : {make_federico_model(), make_faustmann_model(), make_guthrie_model()}) {
        for (int i = 0; i < 1000; ++i) {
            State x = m.dim == 1 ? make_state(0.1 + 90.0 * s.uniform()) : make_state(0.5 + 5.0 * s.uniform(), 1.0 + 900.0 * s.uniform());
            if (m.name == "faustmann") x(0) = -0.25 + 2.75 * s.uniform();
            const State zero = State::Zero(m.dim);
            CHECK(m.impulse_cost(x, zero) == 0.0);
            CHECK(std::isfinite(m.running_reward(x)));
            CHECK(std::isfinite(m.terminal_value(x)));
            CHECK(m.drift(x).allFinite());
            CHECK(m.vol(x).allFinite());
            const auto [lo, hi] = m.impulse_set.bounds(0);
            const State z = m.impulse_vector(lo + (hi - lo) * s.uniform());
            CHECK(std::isfinite(m.impulse_cost(x, z)));
        }
    }
}

TEST_CASE("validation rejects bad horizons and action sets") {
    FedericoParams p;
    p.horizon = 1.0;
    p.dt = 0.3;
    CHECK_THROWS_AS(make_federico_model(p), InvalidModel);
    CHECK_THROWS_AS((ActionSet{{0}, {0.5}, {1.0}, Direction::Up}.validate(1)), InvalidModel);
    CHECK_THROWS_AS((ActionSet{{0}, {-1.0}, {1.0}, Direction::Down}.validate(1)), InvalidModel);
    CHECK_THROWS_AS((ActionSet{{}, {}, {}, Direction::Both}.validate(1)), InvalidModel);
    CHECK_THROWS_AS((ActionSet{{1}, {0.0}, {1.0}, Direction::Up}.validate(1)), InvalidModel);
    CHECK_NOTHROW((ActionSet{{0}, {-1.0}, {1.0}, Direction::Both}.validate(1)));
    GuthrieParams g;
    g.r = 0.01;
    g.mu = 0.2;
    CHECK_THROWS_AS(make_guthrie_model(g), InvalidModel);
}

TEST_CASE("action set admissibility") {
    const ActionSet up{{1}, {0.0}, {10.0}, Direction::Up};
    CHECK(up.admits(make_state(0.0, 5.0)));
    CHECK_FALSE(up.admits(make_state(0.0, -1.0)));
    CHECK_FALSE(up.admits(make_state(1.0, 5.0)));  // uncontrollable coordinate moved
    CHECK_FALSE(up.admits(make_state(0.0, 11.0)));
}

}
