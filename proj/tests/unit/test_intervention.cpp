#include "irmc/errors.hpp"
#include "irmc/intervention.hpp"
#include "irmc/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace irmc;

namespace {

// a (y - m)^2 + b on the first coordinate, plus w * second coordinate in 2-D.
class Quadratic final : public Surrogate {
public:
    Quadratic(double a, double m, double b, int dim = 1, double w = 0.0) : a_(a), m_(m), b_(b), dim_(dim), w_(w) {}
    SurrogateKind kind() const override { return SurrogateKind::Tps; }
    int dim() const override { return dim_; }
    double predict(const State& x) const override {
        return a_ * (x(0) - m_) * (x(0) - m_) + b_ + (dim_ == 2 ? w_ * x(1) : 0.0);
    }
    State gradient(const State& x) const override {
        State g = State::Zero(dim_);
        g(0) = 2.0 * a_ * (x(0) - m_);
        if (dim_ == 2) g(1) = w_;
        return g;
    }
    std::vector<double> coefficients() const override { return {}; }
    std::string describe() const override { return "quadratic"; }
    std::vector<double> diagnostics() const override { return {}; }

private:
    double a_, m_, b_;
    int dim_;
    double w_;
};

// Concave saturating value in capacity for the 2-D power-cost model.
class Saturating final : public Surrogate {
public:
    SurrogateKind kind() const override { return SurrogateKind::Gp; }
    int dim() const override { return 2; }
    double predict(const State& x) const override { return 30.0 * x(0) * std::sqrt(x(1)); }
    State gradient(const State& x) const override { return make_state(30.0 * std::sqrt(x(1)), 15.0 * x(0) / std::sqrt(x(1))); }
    std::vector<double> coefficients() const override { return {}; }
    std::string describe() const override { return "saturating"; }
    std::vector<double> diagnostics() const override { return {}; }
};

std::shared_ptr<const ImpulseModel> federico() { return std::make_shared<const ImpulseModel>(make_federico_model()); }

} // namespace

TEST_SUITE("intervention") {

TEST_CASE("root search on a quadratic") {
    const Quadratic q(-0.05, 60.0, 100.0);
    const TargetLevel t = find_target(q, -1.0, 1.0, 90.0, make_state(10.0), 0);
    CHECK(t.s_star == doctest::Approx(60.0 + 1.0 / (2.0 * -0.05)).epsilon(1e-10));
    CHECK(t.roots.size() == 1);

    // Root agrees with a dense-grid argmax of Q(y) + c0 y to within one grid spacing.
    double best = -1e300, arg = 0.0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 + 89.0 * i / (n - 1);
        const double v = q.predict(make_state(y)) - y;
        if (v > best) best = v, arg = y;
    }
    CHECK(std::abs(arg - t.s_star) < 89.0 / (n - 1));
    CHECK_THROWS_AS(find_target(Quadratic(-0.05, 60.0, 0.0), -1.0, 1.0, 40.0, make_state(1.0), 0), BracketFailure);
}

TEST_CASE("huge fixed cost means never act") {
    FedericoParams p;
    p.c1 = -1e9;
    const ImpulseModel m = make_federico_model(p);
    const Quadratic q(-0.05, 60.0, 100.0);
    const Box dom({1.0}, {90.0});
    for (auto mode : {OptimizerMode::LinearRootSearch, OptimizerMode::GridThenPolish}) {
        InterventionOptions o;
        o.mode = mode;
        for (int i = 0; i < 50; ++i) {
            const ActionDecision d = intervention_value(m, q, dom, make_state(1.0 + 1.8 * i), o);
            CHECK_FALSE(d.act);
            CHECK(d.impulse.isZero());
        }
    }
}

TEST_CASE("linear-cost closed form and decision consistency") {
    const auto m = federico();
    const Quadratic q(-0.05, 60.0, 100.0);
    const Box dom({1.0}, {90.0});
    InterventionOptions o;
    o.mode = OptimizerMode::LinearRootSearch;
    const TargetLevel t = find_target(q, -1.0, 1.0, 90.0, make_state(1.0), 0);
    Stream s(2);
    for (int i = 0; i < 200; ++i) {
        const double x = 1.0 + (t.s_star - 1.0) * s.uniform();
        const ActionDecision d = intervention_value(*m, q, dom, make_state(x), o);
        const double closed = q.predict(make_state(t.s_star)) - t.s_star + x - 10.0;
        CHECK(std::abs(d.m_value - closed) < 1e-10);
        CHECK(d.act == (d.m_value > d.q_value + tie_eps(d.q_value, o.tie_rel)));
        if (d.act) CHECK(d.impulse(0) == doctest::Approx(t.s_star - x));
    }
}

TEST_CASE("action region is a down-set and M is a supremum") {
    const auto m = federico();
    const Quadratic q(-0.05, 60.0, 100.0);
    const Box dom({1.0}, {90.0});
    for (auto mode : {OptimizerMode::LinearRootSearch, OptimizerMode::GridThenPolish}) {
        InterventionOptions o;
        o.mode = mode;
        bool seen_wait = false;
        for (int i = 0; i < 400; ++i) {
            const double x = 1.0 + 89.0 * i / 399.0;
            const ActionDecision d = intervention_value(*m, q, dom, make_state(x), o);
            if (!d.act) seen_wait = true;
            if (seen_wait && d.act) CHECK(std::abs(d.m_value - d.q_value) < tie_eps(d.q_value, o.tie_rel));
        }
        Stream s(4);
        for (int i = 0; i < 20; ++i) {
            const double x = 1.0 + 89.0 * s.uniform();
            const ActionDecision d = intervention_value(*m, q, dom, make_state(x), o);
            for (int j = 0; j < 1000; ++j) {
                const double z = (90.0 - x) * s.uniform();
                if (z == 0.0) continue;
                const double v = q.predict(make_state(x + z)) + m->impulse_cost(make_state(x), make_state(z));
                CHECK(d.m_value >= v - 1e-9 * (1.0 + std::abs(v)));
            }
        }
    }
}

TEST_CASE("grid-then-polish agrees with a dense grid") {
    const auto g = std::make_shared<const ImpulseModel>(make_guthrie_model());
    const Saturating q;
    const Box dom({1.0, 1.0}, {5.0, 1000.0});
    InterventionOptions o;
    o.mode = OptimizerMode::GridThenPolish;
    Stream s(6);
    for (int i = 0; i < 100; ++i) {
        const State x = make_state(1.0 + 4.0 * s.uniform(), 1.0 + 300.0 * s.uniform());
        const ActionDecision d = intervention_value(*g, q, dom, x, o);
        double brute = -1e300;
        for (int j = 1; j <= 2000; ++j) {
            const double z = (1000.0 - x(1)) * j / 2000.0;
            State y = x;
            y(1) += z;
            brute = std::max(brute, q.predict(y) + g->impulse_cost(x, make_state(0.0, z)));
        }
        CHECK(d.m_value >= brute - 1e-4 * std::abs(d.m_value));
        CHECK(d.m_value <= brute + 1e-4 * std::abs(d.m_value));
    }
}

TEST_CASE("target state mode") {
    const ImpulseModel f = make_faustmann_model();
    const Quadratic q(-1.0, 0.5, 3.0);
    const Box dom({-0.25}, {2.5});
    InterventionOptions o;
    o.mode = OptimizerMode::TargetState;
    const ActionDecision d = intervention_value(f, q, dom, make_state(2.0), o);
    CHECK(d.m_value == doctest::Approx(q.predict(make_state(0.0)) + 1.0));
    CHECK(d.act == (d.m_value > d.q_value + tie_eps(d.q_value, o.tie_rel)));
    CHECK(d.impulse(0) == doctest::Approx(-2.0));
    const ActionDecision at_zero = intervention_value(f, q, dom, make_state(0.0), o);
    CHECK_FALSE(at_zero.act);

    const ImpulseModel no_target = make_federico_model();
    CHECK_THROWS_AS(intervention_value(no_target, q, Box({1.0}, {90.0}), make_state(5.0), o), EmptyActionSet);
}

TEST_CASE("step policy cache matches full decisions") {
    const auto m = federico();
    const auto q = std::make_shared<Quadratic>(-0.05, 60.0, 100.0);
    InterventionOptions o;
    o.mode = OptimizerMode::LinearRootSearch;
    const StepPolicy p(m, q, Box({1.0}, {90.0}), o);
    REQUIRE(p.target());
    CHECK(p.target()->s_star == doctest::Approx(50.0));
    CHECK(p.action_intervals().size() == 1);
    for (int i = 0; i < 300; ++i) {
        const State x = make_state(1.0 + 89.0 * i / 299.0);
        const ActionDecision a = p.decide(x), b = p.decide_fast(x);
        CHECK(a.act == b.act);
        if (a.act) CHECK(a.impulse(0) == doctest::Approx(b.impulse(0)).epsilon(1e-12));
        CHECK(p.value(x) == doctest::Approx(std::max(a.q_value, a.m_value)));
    }
}

TEST_CASE("auxiliary impulse surrogate") {
    Eigen::MatrixXd x(8, 1);
    for (int i = 0; i < 8; ++i) x(i, 0) = 1.0 + i;
    const ZSurrogate c = fit_impulse_surrogate(x, Eigen::VectorXd::Constant(8, 4.5));
    for (double t : {1.0, 3.3, 8.0}) CHECK(predict_impulse(c, make_state(t)) == doctest::Approx(4.5).epsilon(1e-6));

    const auto m = federico();
    const auto q = std::make_shared<Quadratic>(-0.05, 60.0, 100.0);
    InterventionOptions o;
    o.mode = OptimizerMode::LinearRootSearch;
    StepPolicy p(m, q, Box({1.0}, {90.0}), o);
    Eigen::MatrixXd sites(30, 1);
    for (int i = 0; i < 30; ++i) sites(i, 0) = 1.0 + 9.0 * i / 29.0;
    p.attach_zhat(sites);
    REQUIRE(p.zhat());
    const double s_star = p.target()->s_star;
    for (double t : {2.0, 5.0, 8.0}) {
        const double zh = predict_impulse(*p.zhat(), make_state(t));
        CHECK(zh == doctest::Approx(s_star - t).epsilon(0.02));
    }
    CHECK_THROWS_AS(fit_impulse_surrogate(x.topRows(3), Eigen::VectorXd::Ones(3)), TooFewSites);
}

}
