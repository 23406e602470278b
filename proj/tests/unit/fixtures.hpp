#pragma once

#include "irmc/oracle.hpp"
#include "irmc/policy.hpp"
#include "irmc/solver.hpp"

#include <memory>

namespace irmc::test {

// Federico problem cut down to one year (K = 10) so a solve takes well under a second.
inline std::shared_ptr<const ImpulseModel> short_federico(double r = 0.08) {
    FedericoParams p;
    p.r = r;
    p.horizon = 1.0;
    return std::make_shared<const ImpulseModel>(make_federico_model(p));
}

inline SolverConfig short_federico_config(std::uint64_t seed = 7) {
    SolverConfig c;
    c.design.scheme = DesignScheme::ExplicitLattice;
    c.design.explicit_sites = linspace(1.0, 90.0, 90);
    c.design.domain = Box({1.0}, {90.0});
    c.design.n_unique = 90;
    c.design.n_rep = 20;
    c.surrogate.kind = SurrogateKind::Tps;
    c.surrogate.tps_kernel = TpsKernel::Cubic;
    c.intervention.mode = OptimizerMode::LinearRootSearch;
    c.seed = seed;
    return c;
}

inline PolicyStack short_federico_stack(std::uint64_t seed = 7, double r = 0.08) {
    return solve(short_federico(r), short_federico_config(seed)).stack;
}

// GBM with linear reward pi(x) = x and phi(x) = x; the fixed cost makes every impulse worthless.
inline std::shared_ptr<const ImpulseModel> inert_gbm(double horizon = 1.0, double dt = 0.1) {
    ImpulseModel m = make_federico_model();
    m.name = "inert";
    m.running_reward = [](const State& x) { return x(0); };
    m.terminal_value = [](const State& x) { return x(0); };
    m.impulse_cost = [](const State&, const State& z) { return z(0) == 0.0 ? 0.0 : -1.0 * z(0) - 1e9; };
    m.impulse_cost_kind = LinearAffineCost{-1.0, -1e9};
    m.horizon = horizon;
    m.dt = dt;
    m.validate();
    return std::make_shared<const ImpulseModel>(std::move(m));
}

// Expected discounted objective of the inert model from x, left-endpoint reward rule.
inline double inert_value(const ImpulseModel& m, double x) {
    const int K = m.steps();
    const double g = std::exp((m.mu - m.discount_rate) * m.dt);
    double v = 0.0, f = 1.0;
    for (int k = 0; k < K; ++k) {
        v += f * x * m.dt;
        f *= g;
    }
    return v + f * x;
}

} // namespace irmc::test
