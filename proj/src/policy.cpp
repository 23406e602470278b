#include "irmc/policy.hpp"

#include "irmc/dynamics.hpp"
#include "irmc/errors.hpp"
#include "irmc/rng.hpp"

#include <cmath>
#include <limits>

namespace irmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PathOutcome {
    double running = 0.0;
    double impulse = 0.0;
    double terminal = 0.0;
    std::vector<ImpulseEvent> events;
};

} // namespace

ForwardReport forward_evaluate(const PolicyStack& stack, const State& x0, const ForwardOptions& options) {
    const ImpulseModel& model = stack.model();
    const int K = model.steps();
    if (stack.steps() != K) throw InvalidModel("policy stack does not cover the model horizon");
    if (options.n_paths < 1) throw InvalidModel("n_paths must be positive");
    if (x0.size() != model.dim || !x0.allFinite()) throw NonFiniteState("bad starting state");
    const double dt = model.dt;
    const double step_disc = std::exp(-model.discount_rate * dt);
    const int coord = model.impulse_set.controllable.front();

    std::vector<PathOutcome> outcomes(options.n_paths);
    const auto tag = static_cast<std::uint64_t>(StreamTag::Forward);
    parallel_for(options.n_paths, options.threads, [&](int p) {
        Stream stream(derive_seed(options.seed, {tag, static_cast<std::uint64_t>(p)}));
        PathOutcome& out = outcomes[p];
        State x = x0;
        double disc = 1.0;
        for (int k = 0; k < K; ++k) {
            const StepPolicy& policy = stack.at(k);
            ActionDecision d;
            if (options.use_zhat || options.fast) d = policy.decide_fast(x, options.use_zhat);
            else d = policy.decide(x);
            if (d.act) {
                out.impulse += disc * model.impulse_cost(x, d.impulse);
                out.events.push_back({p, k, x, d.impulse});
                x += d.impulse;
            }
            out.running += disc * model.running_reward(x) * dt;
            x = advance(model, x, stream);
            if (!x.allFinite()) throw NonFiniteState("non-finite forward state at step " + std::to_string(k + 1));
            disc *= step_disc;
        }
        out.terminal = disc * model.terminal_value(x);
    });

    ForwardReport rep;
    rep.n_paths = options.n_paths;
    rep.use_zhat = options.use_zhat;
    rep.x0 = x0;
    double sum = 0.0, sum_sq = 0.0;
    double gap_sum = 0.0, size_sum = 0.0;
    long gaps = 0;
    if (options.keep_path_values) rep.path_values.reserve(options.n_paths);
    for (auto& out : outcomes) {
        const double v = out.running + out.impulse + out.terminal;
        sum += v;
        sum_sq += v * v;
        rep.mean_running += out.running;
        rep.mean_impulse += out.impulse;
        rep.mean_terminal += out.terminal;
        if (options.keep_path_values) rep.path_values.push_back(v);
        for (std::size_t e = 0; e < out.events.size(); ++e) {
            size_sum += std::abs(out.events[e].impulse(coord));
            if (e > 0) {
                gap_sum += (out.events[e].step - out.events[e - 1].step) * dt;
                ++gaps;
            }
        }
        rep.events.insert(rep.events.end(), out.events.begin(), out.events.end());
    }
    const double n = options.n_paths;
    rep.value_estimate = sum / n;
    rep.mean_running /= n;
    rep.mean_impulse /= n;
    rep.mean_terminal /= n;
    const double var = n > 1 ? std::max(sum_sq - n * rep.value_estimate * rep.value_estimate, 0.0) / (n - 1) : 0.0;
    rep.std_error = std::sqrt(var / n);
    rep.mean_interimpulse_time = gaps > 0 ? gap_sum / gaps : kNaN;
    rep.mean_impulse_size = rep.events.empty() ? kNaN : size_sum / rep.events.size();
    rep.mean_events_per_path = rep.events.size() / n;
    return rep;
}

namespace {

double step_target(const StepPolicy& policy, const ImpulseModel& model) {
    if (policy.target()) return policy.target()->s_star;
    if (policy.options().mode == OptimizerMode::TargetState && model.target_state) {
        return (*model.target_state)(model.impulse_set.controllable.front());
    }
    return kNaN;
}

} // namespace

std::vector<BoundaryPoint> scan_boundary(const PolicyStack& stack) {
    const ImpulseModel& model = stack.model();
    const bool up = model.boundary_direction == Direction::Up;
    std::vector<BoundaryPoint> out(stack.steps());
    for (int k = 0; k < stack.steps(); ++k) {
        const StepPolicy& policy = stack.at(k);
        out[k].step = k;
        out[k].S = step_target(policy, model);
        out[k].s = kNaN;
        if (model.dim != 1) continue;
        for (const auto& [a, b] : policy.action_intervals()) {
            const ActionDecision d = policy.decide(make_state(0.5 * (a + b)));
            if (!d.act) continue;
            const double z = d.impulse(0);
            if (up && z > 0.0) out[k].s = std::isnan(out[k].s) ? b : std::max(out[k].s, b);
            if (!up && z < 0.0) out[k].s = std::isnan(out[k].s) ? a : std::min(out[k].s, a);
        }
    }
    return out;
}

std::vector<BoundaryPoint> extract_boundary(const ForwardReport& report, const PolicyStack& stack, BoundaryMode mode) {
    if (mode == BoundaryMode::Scan) return scan_boundary(stack);
    if (report.events.empty()) throw NoEvents("no impulse events in the forward report");
    const ImpulseModel& model = stack.model();
    const int coord = model.impulse_set.controllable.front();
    const bool up = model.boundary_direction == Direction::Up;
    std::vector<BoundaryPoint> out(stack.steps());
    for (int k = 0; k < stack.steps(); ++k) {
        out[k].step = k;
        out[k].s = kNaN;
        out[k].S = step_target(stack.at(k), model);
    }
    for (const auto& e : report.events) {
        if (e.step < 0 || e.step >= stack.steps()) continue;
        const double z = e.impulse(coord);
        const double x = e.pre_state(coord);
        double& s = out[e.step].s;
        if (up && z > 0.0) s = std::isnan(s) ? x : std::max(s, x);
        if (!up && z < 0.0) s = std::isnan(s) ? x : std::min(s, x);
    }
    return out;
}

LowerBoundCheck lower_bound_check(const ForwardReport& report, double analytic_value) {
    LowerBoundCheck c;
    c.margin = analytic_value + 3.0 * report.std_error - report.value_estimate;
    c.holds = c.margin >= 0.0;
    return c;
}

} // namespace irmc
