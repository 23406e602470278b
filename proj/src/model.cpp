#include "irmc/model.hpp"

#include "irmc/errors.hpp"

#include <cmath>
#include <sstream>

namespace irmc {

void ActionSet::validate(int dim) const {
    if (controllable.empty()) throw InvalidModel("action set has no controllable coordinate");
    if (z_min.size() != controllable.size() || z_max.size() != controllable.size()) {
        throw InvalidModel("action set bounds must have one entry per controllable coordinate");
    }
    for (std::size_t i = 0; i < controllable.size(); ++i) {
        const int c = controllable[i];
        if (c < 0 || c >= dim) throw InvalidModel("controllable coordinate out of range");
        if (!std::isfinite(z_min[i]) || !std::isfinite(z_max[i]) || !(z_min[i] < z_max[i])) {
            throw InvalidModel("impulse bounds must be finite with z_min < z_max");
        }
        switch (direction) {
            case Direction::Up:
                if (z_min[i] != 0.0) throw InvalidModel("Up impulses require z_min = 0");
                break;
            case Direction::Down:
                if (z_max[i] != 0.0) throw InvalidModel("Down impulses require z_max = 0");
                break;
            case Direction::Both:
                if (z_min[i] > 0.0 || z_max[i] < 0.0) throw InvalidModel("Both requires z_min <= 0 <= z_max");
                break;
        }
    }
}

std::pair<double, double> ActionSet::bounds(std::size_t i) const {
    double lo = z_min[i];
    double hi = z_max[i];
    if (direction == Direction::Up) lo = std::max(lo, 0.0);
    if (direction == Direction::Down) hi = std::min(hi, 0.0);
    return {lo, hi};
}

bool ActionSet::admits(const State& z, double tol) const {
    for (int d = 0; d < z.size(); ++d) {
        bool is_controllable = false;
        for (std::size_t i = 0; i < controllable.size(); ++i) {
            if (controllable[i] != d) continue;
            is_controllable = true;
            const auto [lo, hi] = bounds(i);
            const double scale = tol * (1.0 + std::max(std::abs(lo), std::abs(hi)));
            if (!std::isfinite(z(d)) || z(d) < lo - scale || z(d) > hi + scale) return false;
        }
        if (!is_controllable && z(d) != 0.0) return false;
    }
    return true;
}

int ImpulseModel::steps() const {
    return static_cast<int>(std::lround(horizon / dt));
}

State ImpulseModel::impulse_vector(double amount) const {
    State z = State::Zero(dim);
    z(impulse_set.controllable.front()) = amount;
    return z;
}

void ImpulseModel::validate() const {
    if (dim < 1 || dim > kMaxDim) throw InvalidModel("state dimension must be 1 or 2");
    if (!(horizon > 0.0) || !(dt > 0.0)) throw InvalidModel("horizon and dt must be positive");
    const int k = steps();
    if (k < 1 || std::abs(k * dt - horizon) >= 1e-12 * horizon) {
        std::ostringstream os;
        os << "horizon " << horizon << " is not an integer multiple of dt " << dt;
        throw InvalidModel(os.str());
    }
    if (!(discount_rate >= 0.0)) throw InvalidModel("discount rate must be nonnegative");
    if (!(sigma >= 0.0)) throw InvalidModel("volatility must be nonnegative");
    if (!running_reward || !impulse_cost || !terminal_value) throw InvalidModel("model functions must be set");
    if (dynamics_kind == DynamicsKind::EulerGeneric && (!drift || !vol)) {
        throw InvalidModel("Euler dynamics need drift and vol");
    }
    if (dynamics_kind == DynamicsKind::PriceCapacity && dim != 2) {
        throw InvalidModel("price/capacity dynamics are two-dimensional");
    }
    if (x0.size() != dim) throw InvalidModel("x0 has the wrong dimension");
    impulse_set.validate(dim);
    if (target_state && target_state->size() != dim) throw InvalidModel("target state has the wrong dimension");
}

double federico_perpetual_constant(double r, double mu, double sigma, double gamma) {
    return 1.0 / (r - mu * gamma + 0.5 * gamma * (1.0 - gamma) * sigma * sigma);
}

double guthrie_roa(const State& x, double alpha, double beta) {
    return x(0) * std::pow(x(1), alpha - beta);
}

ImpulseModel make_federico_model(const FedericoParams& p) {
    ImpulseModel m;
    m.name = "federico";
    m.dim = 1;
    m.dynamics_kind = DynamicsKind::GbmExact;
    m.mu = p.mu;
    m.sigma = p.sigma;
    const double mu = p.mu, sigma = p.sigma, gamma = p.gamma;
    m.drift = [mu](const State& x) -> State { return mu * x; };
    m.vol = [sigma](const State& x) -> State { return sigma * x; };
    m.running_reward = [gamma](const State& x) { return std::pow(std::max(x(0), 0.0), gamma) / gamma; };
    const double c0 = p.c0, c1 = p.c1;
    m.impulse_cost = [c0, c1](const State&, const State& z) {
        const double a = z(0);
        return a == 0.0 ? 0.0 : c0 * a + c1;
    };
    m.impulse_cost_kind = LinearAffineCost{c0, c1};
    m.impulse_set = ActionSet{{0}, {0.0}, {p.z_max}, Direction::Up};
    m.boundary_direction = Direction::Up;
    const double big_c = federico_perpetual_constant(p.r, p.mu, p.sigma, p.gamma);
    m.terminal_value = [big_c, gamma](const State& x) {
        return big_c * std::pow(std::max(x(0), 0.0), gamma) / gamma;
    };
    m.horizon = p.horizon;
    m.dt = p.dt;
    m.discount_rate = p.r;
    m.x0 = make_state(p.x0);
    m.validate();
    return m;
}

ImpulseModel make_faustmann_model(const FaustmannParams& p) {
    ImpulseModel m;
    m.name = "faustmann";
    m.dim = 1;
    m.dynamics_kind = DynamicsKind::AbmExact;
    m.mu = p.mu;
    m.sigma = p.sigma;
    const double mu = p.mu, sigma = p.sigma;
    m.drift = [mu](const State&) -> State { return make_state(mu); };
    m.vol = [sigma](const State&) -> State { return make_state(sigma); };
    m.running_reward = [](const State&) { return 0.0; };
    const double threshold = p.threshold;
    // z is the displacement, so the harvested amount is -z.
    m.impulse_cost = [threshold](const State&, const State& z) { return std::max(-z(0) - threshold, 0.0); };
    m.impulse_cost_kind = FixedCostPositivePart{threshold};
    // Resets from below the target are admissible (free of charge), so both signs are allowed.
    m.impulse_set = ActionSet{{0}, {-p.z_bound}, {p.z_bound}, Direction::Both};
    m.target_state = make_state(p.target);
    m.boundary_direction = Direction::Down;
    m.terminal_value = [](const State&) { return 0.0; };
    m.horizon = p.horizon;
    m.dt = p.dt;
    m.discount_rate = p.r;
    m.x0 = make_state(p.x0);
    m.validate();
    return m;
}

ImpulseModel make_guthrie_model(const GuthrieParams& p) {
    ImpulseModel m;
    m.name = "guthrie";
    m.dim = 2;
    m.dynamics_kind = DynamicsKind::PriceCapacity;
    m.mu = p.mu;
    m.sigma = p.sigma;
    m.decay = p.delta;
    const double mu = p.mu, sigma = p.sigma, delta = p.delta;
    m.drift = [mu, delta](const State& x) -> State { return make_state(mu * x(0), -delta * x(1)); };
    m.vol = [sigma](const State& x) -> State { return make_state(sigma * x(0), 0.0); };
    const double alpha = p.alpha, beta = p.beta;
    m.running_reward = [alpha](const State& x) { return x(0) * std::pow(std::max(x(1), 0.0), alpha); };
    m.impulse_cost = [beta](const State&, const State& z) {
        const double a = z(1);
        return a == 0.0 ? 0.0 : -std::pow(std::abs(a), beta);
    };
    m.impulse_cost_kind = PowerCost{beta, 1.0};
    m.impulse_set = ActionSet{{1}, {0.0}, {p.z_max}, Direction::Up};
    m.boundary_direction = Direction::Up;
    const double rate = p.r - p.mu + p.terminal_decay * p.alpha * p.delta;
    if (!(rate > 0.0)) throw InvalidModel("terminal perpetuity needs r - mu + w alpha delta > 0");
    const double perpetual = 1.0 / rate;
    m.terminal_value = [alpha, perpetual](const State& x) {
        return x(0) * std::pow(std::max(x(1), 0.0), alpha) * perpetual;
    };
    m.horizon = p.horizon;
    m.dt = p.dt;
    m.discount_rate = p.r;
    m.x0 = make_state(p.p0, p.c0);
    m.validate();
    return m;
}

} // namespace irmc
