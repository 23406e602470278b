#include "irmc/intervention.hpp"

#include "irmc/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace irmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Optimum {
    double m = kNegInf;
    double amount = 0.0;
    bool valid = false;
};

int control_coord(const ImpulseModel& model) {
    if (model.impulse_set.controllable.size() != 1) {
        throw UnsupportedDimension("impulses on more than one coordinate are not supported");
    }
    return model.impulse_set.controllable.front();
}

// Admissible targets for the controlled coordinate, intersected with the domain.
std::pair<double, double> target_range(const ImpulseModel& model, const Box& domain, const State& x, int coord) {
    const auto [zlo, zhi] = model.impulse_set.bounds(0);
    return {std::max(x(coord) + zlo, domain.lo[coord]), std::min(x(coord) + zhi, domain.hi[coord])};
}

bool is_zero_move(double y, double x) { return std::abs(y - x) <= 1e-12 * (1.0 + std::abs(x)); }

double objective(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x, int coord,
                 double y) {
    State post = domain.clamp(x);
    post(coord) = y;
    return q.predict(post) + model.impulse_cost(x, model.impulse_vector(y - x(coord)));
}

Optimum grid_then_polish(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x, int coord,
                         const InterventionOptions& options) {
    Optimum best;
    const auto [a, b] = target_range(model, domain, x, coord);
    if (!(a <= b)) return best;
    const int n = std::max(options.grid_points, 2);
    const double xc = x(coord);
    auto f = [&](double y) { return is_zero_move(y, xc) ? kNegInf : objective(model, q, domain, x, coord, y); };
    auto consider = [&](double y, double fy) {
        if (fy > kNegInf && (!best.valid || fy > best.m)) best = {fy, y - xc, true};
    };
    std::vector<double> ys(n), fs(n);
    for (int i = 0; i < n; ++i) {
        ys[i] = (a == b) ? a : a + (b - a) * i / (n - 1);
        fs[i] = f(ys[i]);
        consider(ys[i], fs[i]);
    }
    if (!best.valid) return best;
    // The supremum may sit at an arbitrarily small move; approach it from inside the range.
    const double eps = 1e-11 * (1.0 + std::abs(xc));
    if (is_zero_move(a, xc) && b > a) consider(std::min(xc + eps, b), f(std::min(xc + eps, b)));
    if (is_zero_move(b, xc) && b > a) consider(std::max(xc - eps, a), f(std::max(xc - eps, a)));

    // Golden-section polish around the best few local maxima of the grid.
    std::vector<int> peaks;
    for (int i = 0; i < n; ++i) {
        const bool left = i == 0 || fs[i] >= fs[i - 1];
        const bool right = i == n - 1 || fs[i] >= fs[i + 1];
        if (fs[i] > kNegInf && left && right) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](int i, int j) { return fs[i] > fs[j]; });
    if (peaks.size() > 5) peaks.resize(5);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i : peaks) {
        double lo = ys[std::max(i - 1, 0)], hi = ys[std::min(i + 1, n - 1)];
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < options.polish_iters; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = f(d);
            }
        }
        consider(c, fc);
        consider(d, fd);
    }
    return best;
}

Optimum linear_root(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x, int coord,
                    const TargetLevel& t, bool cached_values) {
    const auto& cost = std::get<LinearAffineCost>(model.impulse_cost_kind);
    Optimum best;
    const auto [a, b] = target_range(model, domain, x, coord);
    if (!(a <= b)) return best;
    const double xc = x(coord);
    auto h = [&](double y, int root_index) {
        if (cached_values && root_index >= 0) return t.root_values[root_index];
        State post = domain.clamp(x);
        post(coord) = y;
        return q.predict(post) + cost.c0 * y;
    };
    auto consider = [&](double y, int root_index) {
        if (is_zero_move(y, xc) || y < a || y > b) return;
        const double m = h(y, root_index) - cost.c0 * xc + cost.c1;
        if (!best.valid || m > best.m) best = {m, y - xc, true};
    };
    if (t.s_star >= a && t.s_star <= b && !is_zero_move(t.s_star, xc)) {
        const auto it = std::find(t.roots.begin(), t.roots.end(), t.s_star);
        consider(t.s_star, static_cast<int>(it - t.roots.begin()));
        return best;
    }
    for (std::size_t i = 0; i < t.roots.size(); ++i) consider(t.roots[i], static_cast<int>(i));
    consider(a, -1);
    consider(b, -1);
    // The supremum may sit at an arbitrarily small move; approach it from inside the range.
    const double eps = 1e-11 * (1.0 + std::abs(xc));
    if (is_zero_move(a, xc)) consider(std::min(xc + eps, b), -1);
    if (is_zero_move(b, xc)) consider(std::max(xc - eps, a), -1);
    return best;
}

Optimum target_state(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x, int coord,
                     const double* q_at_target) {
    Optimum best;
    if (!model.target_state) throw EmptyActionSet("TargetState mode needs a model target state");
    const double y = (*model.target_state)(coord);
    const double amount = y - x(coord);
    if (is_zero_move(y, x(coord))) return best;
    const auto [zlo, zhi] = model.impulse_set.bounds(0);
    if (amount < zlo || amount > zhi) return best;
    double qv;
    if (q_at_target) {
        qv = *q_at_target;
    } else {
        State post = domain.clamp(x);
        post(coord) = y;
        qv = q.predict(domain.clamp(post));
    }
    return {qv + model.impulse_cost(x, model.impulse_vector(amount)), amount, true};
}

Optimum optimize(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x,
                 const InterventionOptions& options, const TargetLevel* target, const double* q_at_target) {
    const int coord = control_coord(model);
    switch (options.mode) {
        case OptimizerMode::TargetState:
            return target_state(model, q, domain, x, coord, q_at_target);
        case OptimizerMode::LinearRootSearch: {
            if (!std::holds_alternative<LinearAffineCost>(model.impulse_cost_kind)) {
                throw InvalidModel("root search requires a linear affine impulse cost");
            }
            if (target && model.dim == 1) return linear_root(model, q, domain, x, coord, *target, true);
            const double c0 = std::get<LinearAffineCost>(model.impulse_cost_kind).c0;
            try {
                const TargetLevel t = find_target(q, c0, domain.lo[coord], domain.hi[coord], domain.clamp(x), coord,
                                                  options.root_scan_points);
                return linear_root(model, q, domain, x, coord, t, false);
            } catch (const BracketFailure&) {
                return grid_then_polish(model, q, domain, x, coord, options);
            }
        }
        case OptimizerMode::GridThenPolish:
            return grid_then_polish(model, q, domain, x, coord, options);
    }
    return {};
}

ActionDecision make_decision(const ImpulseModel& model, double q, const Optimum& opt, double tie_rel) {
    ActionDecision d;
    d.q_value = q;
    d.m_value = opt.valid ? opt.m : kNegInf;
    d.act = opt.valid && d.m_value > q + tie_eps(q, tie_rel);
    d.impulse = d.act ? model.impulse_vector(opt.amount) : State(State::Zero(model.dim));
    return d;
}

} // namespace

double tie_eps(double q, double rel) { return rel * (1.0 + std::abs(q)); }

TargetLevel find_target(const Surrogate& q, double c0, double lo, double hi, const State& base, int coord,
                        int scan_points) {
    if (!(lo < hi)) throw BracketFailure("empty search interval");
    const int n = std::max(scan_points, 3);
    State p = base;
    auto g = [&](double y) {
        p(coord) = y;
        return q.gradient(p)(coord) + c0;
    };
    TargetLevel t;
    t.bracket_lo = lo;
    t.bracket_hi = hi;
    double y_prev = lo, g_prev = g(lo);
    for (int i = 1; i < n; ++i) {
        const double y = lo + (hi - lo) * i / (n - 1);
        const double gy = g(y);
        if (g_prev > 0.0 && gy <= 0.0) {
            double root = y;
            if (gy < 0.0) {
                boost::uintmax_t iters = 200;
                const auto r = boost::math::tools::toms748_solve(g, y_prev, y, g_prev, gy,
                                                                 boost::math::tools::eps_tolerance<double>(50), iters);
                root = 0.5 * (r.first + r.second);
            }
            p(coord) = root;
            t.roots.push_back(root);
            t.root_values.push_back(q.predict(p) + c0 * root);
        }
        y_prev = y;
        g_prev = gy;
    }
    if (t.roots.empty()) throw BracketFailure("gradient never crosses -c0 inside the search interval");
    const auto best = std::max_element(t.root_values.begin(), t.root_values.end()) - t.root_values.begin();
    t.s_star = t.roots[best];
    return t;
}

ActionDecision intervention_value(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x,
                                  const InterventionOptions& options, const TargetLevel* target) {
    if (!x.allFinite()) throw NonFiniteState("non-finite state in intervention");
    const double qv = q.predict(domain.clamp(x));
    return make_decision(model, qv, optimize(model, q, domain, x, options, target, nullptr), options.tie_rel);
}

ZSurrogate fit_impulse_surrogate(const Eigen::MatrixXd& x_sites, const Eigen::VectorXd& z_opt) {
    if (x_sites.rows() < 5) throw TooFewSites("impulse surrogate needs at least 5 sites");
    return {std::make_shared<TpsSurrogate>(fit_tps(x_sites, z_opt))};
}

double predict_impulse(const ZSurrogate& zs, const State& x) { return zs.fit->predict(x); }

// ---------------------------------------------------------------- StepPolicy

StepPolicy::StepPolicy(std::shared_ptr<const ImpulseModel> model, SurrogatePtr q, Box domain,
                       InterventionOptions options)
    : model_(std::move(model)), q_(std::move(q)), domain_(std::move(domain)), options_(options) {
    const int coord = control_coord(*model_);
    if (options_.mode == OptimizerMode::LinearRootSearch && model_->dim == 1) {
        const double c0 = std::get<LinearAffineCost>(model_->impulse_cost_kind).c0;
        try {
            target_ = find_target(*q_, c0, domain_.lo[coord], domain_.hi[coord], domain_.clamp(model_->x0), coord,
                                  options_.root_scan_points);
        } catch (const BracketFailure&) {
            options_.mode = OptimizerMode::GridThenPolish;
        }
    }
    if (options_.mode == OptimizerMode::TargetState) {
        if (!model_->target_state) throw EmptyActionSet("TargetState mode needs a model target state");
        q_at_target_ = q_->predict(domain_.clamp(*model_->target_state));
    }

    if (model_->dim == 1 && options_.cache_points > 1) {
        const int n = options_.cache_points;
        const double lo = domain_.lo[0], hi = domain_.hi[0];
        auto acts = [&](double y) { return decide(make_state(y)).act; };
        std::vector<double> ys(n);
        std::vector<char> flags(n);
        for (int i = 0; i < n; ++i) {
            ys[i] = lo + (hi - lo) * i / (n - 1);
            flags[i] = acts(ys[i]);
        }
        // Refine each flip to a boundary point by bisection on the action flag.
        auto refine = [&](double a, double b, bool flag_a) {
            for (int it = 0; it < 60 && b - a > 1e-12 * (1.0 + std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                if (static_cast<bool>(acts(mid)) == flag_a) a = mid;
                else b = mid;
            }
            return std::make_pair(a, b);
        };
        double start = lo;
        bool in = flags[0];
        for (int i = 1; i < n; ++i) {
            if (flags[i] == flags[i - 1]) continue;
            const auto [a, b] = refine(ys[i - 1], ys[i], flags[i - 1]);
            if (in) intervals_.emplace_back(start, a);
            else start = b;
            in = flags[i];
        }
        if (in) intervals_.emplace_back(start, hi);
        cached_ = true;
    }
}

double StepPolicy::q_value(const State& x) const { return q_->predict(domain_.clamp(x)); }

ActionDecision StepPolicy::decide(const State& x) const {
    if (!x.allFinite()) throw NonFiniteState("non-finite state in policy");
    const double* qt = options_.mode == OptimizerMode::TargetState ? &q_at_target_ : nullptr;
    const TargetLevel* t = target_ ? &*target_ : nullptr;
    return make_decision(*model_, q_value(x), optimize(*model_, *q_, domain_, x, options_, t, qt), options_.tie_rel);
}

ActionDecision StepPolicy::decide_with_target(const State& x, double target_coord) const {
    const int coord = control_coord(*model_);
    Optimum opt;
    const auto [a, b] = target_range(*model_, domain_, x, coord);
    if (a <= b && !is_zero_move(target_coord, x(coord))) {
        const double y = std::clamp(target_coord, a, b);
        if (!is_zero_move(y, x(coord))) opt = {objective(*model_, *q_, domain_, x, coord, y), y - x(coord), true};
    }
    return make_decision(*model_, q_value(x), opt, options_.tie_rel);
}

ActionDecision StepPolicy::decide_fast(const State& x, bool use_zhat) const {
    if (cached_ && domain_.contains(x)) {
        const double v = x(0);
        bool act = false;
        for (const auto& [a, b] : intervals_) {
            if (v >= a && v <= b) {
                act = true;
                break;
            }
        }
        if (!act) {
            ActionDecision d;
            d.impulse = State::Zero(model_->dim);
            d.q_value = kNaN;
            d.m_value = kNaN;
            return d;
        }
    }
    if (use_zhat && zhat_) {
        const int coord = control_coord(*model_);
        return decide_with_target(x, x(coord) + predict_impulse(*zhat_, domain_.clamp(x)));
    }
    return decide(x);
}

double StepPolicy::value(const State& x) const {
    const ActionDecision d = decide_fast(x);
    if (d.act) return d.m_value;
    return std::isnan(d.q_value) ? q_value(x) : d.q_value;
}

void StepPolicy::attach_zhat(const Eigen::MatrixXd& sites) {
    const double* qt = options_.mode == OptimizerMode::TargetState ? &q_at_target_ : nullptr;
    const TargetLevel* t = target_ ? &*target_ : nullptr;
    std::vector<int> rows;
    std::vector<double> amounts;
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
        const State x = sites.row(i).transpose();
        const Optimum opt = optimize(*model_, *q_, domain_, x, options_, t, qt);
        if (!opt.valid) continue;
        rows.push_back(static_cast<int>(i));
        amounts.push_back(opt.amount);
    }
    if (static_cast<int>(rows.size()) < std::max(5, model_->dim + 3)) return;
    Eigen::MatrixXd xs(rows.size(), sites.cols());
    Eigen::VectorXd zs(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        xs.row(i) = sites.row(rows[i]);
        zs(i) = amounts[i];
    }
    zhat_ = fit_impulse_surrogate(xs, zs);
}

} // namespace irmc
