#include "irmc/oracle.hpp"

#include "irmc/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace irmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
double solve_bracketed(F f, double a, double b) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw InvalidParameters("root is not bracketed");
    boost::uintmax_t iters = 300;
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

} // namespace

double FedericoSolution::v_continuation(double x) const {
    return B * std::pow(x, m) + C * std::pow(x, gamma) / gamma;
}

double FedericoSolution::dv_continuation(double x) const {
    return B * m * std::pow(x, m - 1.0) + C * std::pow(x, gamma - 1.0);
}

double FedericoSolution::v(double x) const {
    if (x >= s) return v_continuation(x);
    return v_continuation(S) + c0 * (S - x) + c1;
}

double FedericoSolution::dv(double x) const { return x >= s ? dv_continuation(x) : -c0; }

double FedericoSolution::inflection_formula_s() const {
    return std::pow(c0 * (m - 1.0) / (C * (m - gamma)), 1.0 / (gamma - 1.0));
}

FedericoSolution federico_solution(double r, double mu, double sigma, double gamma, double c0, double c1) {
    if (!(r > 0.0) || !(sigma > 0.0)) throw InvalidParameters("need r > 0 and sigma > 0");
    if (!(gamma > 0.0) || !(gamma < 1.0) || 1.0 - gamma < 1e-8) throw InvalidParameters("need 0 < gamma < 1");
    if (!(c0 < 0.0) || !(c1 < 0.0)) throw InvalidParameters("need c0 < 0 and c1 < 0 (costs as negative revenue)");
    const double a = 0.5 - mu / (sigma * sigma);
    const double disc = a * a + 2.0 * r / (sigma * sigma);
    if (!(disc > 0.0)) throw InvalidParameters("nonpositive discriminant");
    const double denom = r - mu * gamma + 0.5 * gamma * (1.0 - gamma) * sigma * sigma;
    if (!(denom > 0.0)) throw InvalidParameters("perpetual running reward is infinite (r - mu gamma + ... <= 0)");

    FedericoSolution sol;
    sol.r = r;
    sol.mu = mu;
    sol.sigma = sigma;
    sol.gamma = gamma;
    sol.c0 = c0;
    sol.c1 = c1;
    sol.m = a - std::sqrt(disc);
    sol.C = 1.0 / denom;
    const double m = sol.m, C = sol.C, slope = -c0;

    // For fixed B, v' rises from -inf to a peak at y_peak and then decays to 0,
    // so v' = -c0 has one root on each side of the peak when the peak is high enough.
    struct Roots {
        double s, S;
        bool ok;
    };
    auto roots_for = [&](double B) -> Roots {
        const double y_peak = std::pow(C * (1.0 - gamma) / (B * m * (m - 1.0)), 1.0 / (m - gamma));
        auto g = [&](double y) { return B * m * std::pow(y, m - 1.0) + C * std::pow(y, gamma - 1.0) - slope; };
        if (!(g(y_peak) > 0.0)) return {y_peak, y_peak, false};
        double lo = y_peak;
        for (int i = 0; i < 2000 && g(lo) > 0.0; ++i) lo *= 0.5;
        double hi = y_peak;
        for (int i = 0; i < 2000 && g(hi) > 0.0; ++i) hi *= 2.0;
        return {solve_bracketed(g, lo, y_peak), solve_bracketed(g, y_peak, hi), true};
    };
    auto gain = [&](double log_b) {
        const double B = std::exp(log_b);
        const Roots rt = roots_for(B);
        if (!rt.ok) return c1;
        auto h = [&](double y) { return B * std::pow(y, m) + C * std::pow(y, gamma) / gamma + c0 * y; };
        return h(rt.S) - h(rt.s) + c1;
    };
    double lo = 0.0, hi = 0.0;
    // Find a B with positive gain (small B) and one with no roots (large B).
    while (!(gain(lo) > 0.0)) {
        lo -= 2.0;
        if (lo < -700.0) throw InvalidParameters("cannot bracket the (s,S) solution");
    }
    hi = lo;
    while (gain(hi) > 0.0) {
        hi += 2.0;
        if (hi > 700.0) throw InvalidParameters("cannot bracket the (s,S) solution");
    }
    const double log_b = solve_bracketed(gain, lo, hi);
    sol.B = std::exp(log_b);
    const Roots rt = roots_for(sol.B);
    if (!rt.ok) throw InvalidParameters("degenerate (s,S) solution");
    sol.s = rt.s;
    sol.S = rt.S;
    return sol;
}

// ---------------------------------------------------------------- grid DP

void gauss_hermite_normal(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (n < 1) throw InvalidParameters("need at least one quadrature node");
    // Golub-Welsch for the probabilists' Hermite weight exp(-x^2/2).
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        j(i, i - 1) = std::sqrt(static_cast<double>(i));
        j(i - 1, i) = j(i, i - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes = es.eigenvalues();
    weights = es.eigenvectors().row(0).transpose().array().square();
    weights /= weights.sum();
}

namespace {

double interp(const Eigen::VectorXd& grid, const double* values, double x) {
    const auto n = grid.size();
    Eigen::Index i;
    if (x <= grid(0)) i = 0;
    else if (x >= grid(n - 1)) i = n - 2;
    else i = static_cast<Eigen::Index>(std::upper_bound(grid.data(), grid.data() + n, x) - grid.data()) - 1;
    const double t = (x - grid(i)) / (grid(i + 1) - grid(i));
    return values[i] + t * (values[i + 1] - values[i]);
}

} // namespace

double DpResult::value_at(int k, double x) const {
    const Eigen::VectorXd row = value.row(k).transpose();
    return interp(grid, row.data(), x);
}

double DpResult::boundary(int k, Direction direction) const {
    double best = kNaN;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (!act(k, i)) continue;
        const double x = grid(i);
        if (direction != Direction::Down && target(k, i) > x) best = std::isnan(best) ? x : std::max(best, x);
        if (direction == Direction::Down && target(k, i) < x) best = std::isnan(best) ? x : std::min(best, x);
    }
    return best;
}

DpResult brute_force_dp(const ImpulseModel& model, const DpGrid& spec) {
    if (model.dim != 1) throw UnsupportedDimension("grid DP is one-dimensional");
    if (spec.n < 3 || !(spec.lo < spec.hi)) throw InvalidParameters("bad DP grid");
    if (spec.log_spacing && !(spec.lo > 0.0)) throw InvalidParameters("log-spaced grid needs lo > 0");
    if (model.dynamics_kind != DynamicsKind::GbmExact && model.dynamics_kind != DynamicsKind::AbmExact &&
        model.dynamics_kind != DynamicsKind::EulerGeneric) {
        throw UnsupportedDimension("grid DP supports GBM, ABM and Euler dynamics");
    }
    const int n = spec.n;
    const int K = model.steps();
    const double dt = model.dt;
    const double disc = std::exp(-model.discount_rate * dt);

    DpResult res;
    res.dt = dt;
    res.grid.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        res.grid(i) = spec.log_spacing ? std::exp(std::log(spec.lo) + t * (std::log(spec.hi) - std::log(spec.lo)))
                                       : spec.lo + t * (spec.hi - spec.lo);
    }
    Eigen::VectorXd nodes, weights;
    gauss_hermite_normal(spec.quadrature_nodes, nodes, weights);

    // Successor states for every grid point and node (time-homogeneous).
    Eigen::MatrixXd next(n, nodes.size());
    const double sq = std::sqrt(dt);
    for (int i = 0; i < n; ++i) {
        const double x = res.grid(i);
        for (Eigen::Index j = 0; j < nodes.size(); ++j) {
            const double z = nodes(j);
            switch (model.dynamics_kind) {
                case DynamicsKind::GbmExact:
                    next(i, j) = x * std::exp((model.mu - 0.5 * model.sigma * model.sigma) * dt + model.sigma * sq * z);
                    break;
                case DynamicsKind::AbmExact:
                    next(i, j) = x + model.mu * dt + model.sigma * sq * z;
                    break;
                default: {
                    const State s = make_state(x);
                    next(i, j) = x + model.drift(s)(0) * dt + model.vol(s)(0) * sq * z;
                    break;
                }
            }
        }
    }

    const auto [zlo, zhi] = model.impulse_set.bounds(0);
    res.value.resize(K + 1, n);
    res.q.resize(K, n);
    res.act = Eigen::MatrixXi::Zero(K, n);
    res.target = Eigen::MatrixXd::Constant(K, n, kNaN);
    for (int i = 0; i < n; ++i) res.value(K, i) = model.terminal_value(make_state(res.grid(i)));
    Eigen::VectorXd running(n);
    for (int i = 0; i < n; ++i) running(i) = model.running_reward(make_state(res.grid(i))) * dt;

    for (int k = K - 1; k >= 0; --k) {
        const Eigen::VectorXd v_next = res.value.row(k + 1).transpose();
        for (int i = 0; i < n; ++i) {
            double e = 0.0;
            for (Eigen::Index j = 0; j < nodes.size(); ++j) e += weights(j) * interp(res.grid, v_next.data(), next(i, j));
            res.q(k, i) = running(i) + disc * e;
        }
        for (int i = 0; i < n; ++i) {
            const double x = res.grid(i);
            const State xs = make_state(x);
            double best = -std::numeric_limits<double>::infinity();
            double best_y = kNaN;
            if (model.target_state) {
                const double y = (*model.target_state)(0);
                const double z = y - x;
                if (z != 0.0 && z >= zlo && z <= zhi) {
                    const Eigen::VectorXd qrow = res.q.row(k).transpose();
                    best = interp(res.grid, qrow.data(), y) + model.impulse_cost(xs, make_state(z));
                    best_y = y;
                }
            } else {
                for (int t = 0; t < n; ++t) {
                    const double z = res.grid(t) - x;
                    if (t == i || z < zlo || z > zhi) continue;
                    const double m = res.q(k, t) + model.impulse_cost(xs, make_state(z));
                    if (m > best) {
                        best = m;
                        best_y = res.grid(t);
                    }
                }
            }
            const double q = res.q(k, i);
            if (best > q + 1e-9 * (1.0 + std::abs(q))) {
                res.act(k, i) = 1;
                res.target(k, i) = best_y;
                res.value(k, i) = best;
            } else {
                res.value(k, i) = q;
            }
        }
    }
    return res;
}

} // namespace irmc
