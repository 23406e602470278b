#pragma once

#include "irmc/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace irmc {

enum class DynamicsKind { GbmExact, AbmExact, EulerGeneric, PriceCapacity };
enum class Direction { Up, Down, Both };

/// Admissible impulses. Impulses are state displacements: the post-impulse
/// state is x + z, with z nonzero only on controllable coordinates.
struct ActionSet {
    std::vector<int> controllable;
    std::vector<double> z_min;  // one entry per controllable coordinate
    std::vector<double> z_max;
    Direction direction = Direction::Both;

    void validate(int dim) const;
    bool admits(const State& z, double tol = 1e-12) const;
    /// Admissible displacement interval for controllable entry `i`.
    std::pair<double, double> bounds(std::size_t i) const;
};

struct LinearAffineCost {
    double c0;  // net revenue per unit impulse (negative for costs)
    double c1;  // fixed net revenue per impulse (negative for costs)
};
/// Revenue (harvest - threshold)_+ with harvest = -z.
struct FixedCostPositivePart {
    double threshold;
};
/// Net revenue -scale * |z|^beta.
struct PowerCost {
    double beta;
    double scale = 1.0;
};
struct CustomCost {};

using ImpulseCostKind = std::variant<LinearAffineCost, FixedCostPositivePart, PowerCost, CustomCost>;

using StateFn = std::function<double(const State&)>;
using VectorFn = std::function<State(const State&)>;
using CostFn = std::function<double(const State&, const State&)>;

/// Full definition of a finite-horizon impulse control problem.
///
/// The impulse cost is always the net revenue added to the objective, so
/// costs are negative. Immutable once built; safe to share between threads.
struct ImpulseModel {
    std::string name;
    int dim = 1;

    DynamicsKind dynamics_kind = DynamicsKind::GbmExact;
    // Coefficients used by the exact samplers. For PriceCapacity, mu and
    // sigma drive the price coordinate and decay is the capacity decay rate.
    double mu = 0.0;
    double sigma = 0.0;
    double decay = 0.0;
    // Generic coefficients; the Euler sampler uses these (independent noise per coordinate).
    VectorFn drift;
    VectorFn vol;

    StateFn running_reward;
    CostFn impulse_cost;
    ImpulseCostKind impulse_cost_kind = CustomCost{};
    ActionSet impulse_set;
    /// When set, every impulse moves the controllable coordinates to this state.
    std::optional<State> target_state;
    /// Side of the action region used when reading thresholds off forward paths.
    Direction boundary_direction = Direction::Up;

    StateFn terminal_value;
    double horizon = 1.0;
    double dt = 0.1;
    double discount_rate = 0.0;
    State x0;

    /// Number of decision periods K = T / dt.
    int steps() const;
    double time(int k) const { return k * dt; }
    /// Throws InvalidModel on any violated invariant.
    void validate() const;

    /// Expand a scalar impulse on the first controllable coordinate to a full displacement.
    State impulse_vector(double amount) const;
};

struct FedericoParams {
    double r = 0.08;
    double mu = -0.07;
    double sigma = 0.25;
    double gamma = 0.5;
    double c0 = -1.0;
    double c1 = -10.0;
    double x0 = 50.0;
    double horizon = 10.0;
    double dt = 0.1;
    double z_max = 100.0;
};

struct FaustmannParams {
    double r = 0.1;
    double mu = 0.0;
    double sigma = 1.0;
    double threshold = 1.0;
    double target = 0.0;
    double x0 = 0.0;
    double horizon = 5.0;
    double dt = 0.1;
    double z_bound = 20.0;
};

struct GuthrieParams {
    double r = 0.04;
    double mu = 0.0;
    double sigma = 0.08;
    double delta = 0.1;
    double beta = 0.95;
    double alpha = 0.5;
    double p0 = 2.2;
    double c0 = 110.0;
    double horizon = 50.0;
    double dt = 1.0;
    double z_max = 5000.0;
    /// Weight of capacity decay in the terminal perpetuity p c^alpha / (r - mu + w alpha delta);
    /// 1 gives the expected discounted reward of the uncontrolled state, 0 ignores decay.
    double terminal_decay = 1.0;
};

/// 1-D irreversible investment: GBM state, power running reward, linear impulse costs.
ImpulseModel make_federico_model(const FedericoParams& p = {});
/// Forest rotation: arithmetic BM stand value, cut to a fixed level, revenue (harvest - 1)_+.
ImpulseModel make_faustmann_model(const FaustmannParams& p = {});
/// 2-D capacity expansion: GBM price, decaying capacity, concave investment cost.
ImpulseModel make_guthrie_model(const GuthrieParams& p = {});

/// Perpetual discounted running reward of the uncontrolled Federico state,
/// C with the closed-form constant 1 / (r - mu gamma + gamma (1-gamma) sigma^2 / 2).
double federico_perpetual_constant(double r, double mu, double sigma, double gamma);

/// Return on assets p * c^(alpha - beta) for the capacity model.
double guthrie_roa(const State& x, double alpha, double beta);

} // namespace irmc
