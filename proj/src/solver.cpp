#include "irmc/solver.hpp"

#include "irmc/dynamics.hpp"
#include "irmc/errors.hpp"
#include "irmc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace irmc {

int Lookahead::steps_from(int k, int K) const {
    const int remaining = K - k;
    switch (kind) {
        case Kind::OneStep:
            return 1;
        case Kind::FixedW:
            return std::min(w, remaining);
        case Kind::ToMaturity:
            return remaining;
    }
    return remaining;
}

void SolverConfig::validate(int K) const {
    if (lookahead.kind == Lookahead::Kind::FixedW && (lookahead.w < 1 || lookahead.w > K)) {
        throw InvalidModel("lookahead w must be in [1, K]");
    }
    if (design.n_rep < 1) throw TooFewSites("n_rep must be at least 1");
    if (threads < 1) throw InvalidModel("threads must be positive");
}

PolicyStack::PolicyStack(std::shared_ptr<const ImpulseModel> model, std::vector<std::shared_ptr<const StepPolicy>> steps)
    : model_(std::move(model)), steps_(std::move(steps)) {}

double PolicyStack::value(int k, const State& x) const {
    if (k >= steps()) return model_->terminal_value(x);
    return at(k).value(x);
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += workers) f(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

struct PathResult {
    double reward = 0.0;
    bool acted = false;
};

// One training path started at `x` on step k, following the fitted policies of later steps.
PathResult rollout(const ImpulseModel& model, const std::vector<std::shared_ptr<const StepPolicy>>& fitted, int k,
                   int w, bool mpc, State x, Stream& stream) {
    const int K = model.steps();
    const double dt = model.dt;
    const double step_disc = std::exp(-model.discount_rate * dt);
    PathResult out;
    out.reward = model.running_reward(x) * dt;
    double disc = 1.0;
    for (int l = k + 1; l <= k + w; ++l) {
        x = advance(model, x, stream);
        if (!x.allFinite()) throw NonFiniteState("non-finite training state at step " + std::to_string(l));
        disc *= step_disc;
        if (l == K) {
            out.reward += disc * model.terminal_value(x);
            break;
        }
        const StepPolicy& policy = mpc ? *fitted[k + 1] : *fitted[l];
        if (l == k + w) {
            out.reward += disc * fitted[l]->value(x);
            break;
        }
        const ActionDecision d = policy.decide_fast(x);
        if (d.act) {
            out.reward += disc * model.impulse_cost(x, d.impulse);
            x += d.impulse;
            out.acted = true;
        }
        out.reward += disc * model.running_reward(x) * dt;
    }
    return out;
}

} // namespace

SolveResult solve(std::shared_ptr<const ImpulseModel> model_ptr, const SolverConfig& config) {
    const ImpulseModel& model = *model_ptr;
    model.validate();
    const int K = model.steps();
    config.validate(K);
    for (int j : config.surrogate.log_coords) {
        if (j < 0 || j >= model.dim) throw InvalidModel("surrogate log coordinate out of range");
    }

    std::vector<std::shared_ptr<const StepPolicy>> fitted(K);
    SolveResult result;
    std::optional<TpsFactorization> tps_cache;
    std::optional<GpHyper> last_hyper;

    for (int k = K - 1; k >= 0; --k) {
        const auto started = std::chrono::steady_clock::now();
        StepTrace trace;
        try {
            const TrainingDesign design = build_design_for_step(config.design, k, model.time(k), config.seed);
            const int n_unique = design.n_unique();
            const int n_rep = design.n_rep;
            const int w = config.lookahead.steps_from(k, K);

            Eigen::MatrixXd responses(n_unique, n_rep);
            std::vector<char> acted(static_cast<std::size_t>(n_unique) * n_rep, 0);
            const auto tag = static_cast<std::uint64_t>(StreamTag::Training);
            parallel_for(n_unique * n_rep, config.threads, [&](int idx) {
                const int i = idx / n_rep;
                const int r = idx % n_rep;
                const bool mirror = config.antithetic && (r % 2 == 1);
                const auto stream_id = static_cast<std::uint64_t>(config.antithetic ? r / 2 : r);
                const std::uint64_t seed =
                    config.common_random_numbers
                        ? derive_seed(config.seed, {tag, static_cast<std::uint64_t>(k), stream_id})
                        : derive_seed(config.seed, {tag, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i), stream_id});
                Stream stream(seed, mirror);
                const State x0 = design.unique_sites.row(i).transpose();
                const PathResult p = rollout(model, fitted, k, w, config.mpc_mode, x0, stream);
                responses(i, r) = p.reward;
                acted[idx] = p.acted;
            });

            const PreAveraged avg = pre_average(responses);
            const auto& log_coords = config.surrogate.log_coords;
            const Eigen::MatrixXd fit_sites = WarpedSurrogate::warp(design.unique_sites, log_coords);
            SurrogatePtr q;
            if (config.surrogate.kind == SurrogateKind::Tps) {
                if (!tps_cache || !tps_cache->same_sites(fit_sites, config.surrogate.tps_kernel)) {
                    tps_cache = factorize_tps(fit_sites, config.surrogate.tps_kernel);
                }
                q = std::make_shared<TpsSurrogate>(fit_tps(*tps_cache, avg.means, config.surrogate.lambda));
            } else {
                GpFitOptions opt;
                opt.kernel = config.surrogate.kernel;
                opt.restarts = config.surrogate.restarts;
                opt.max_evals = config.surrogate.max_evals;
                opt.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(StreamTag::Fit), static_cast<std::uint64_t>(k)});
                opt.noise_scale = Eigen::VectorXd::Constant(n_unique, 1.0 / n_rep);
                for (int j = 0; j < design.domain.dim(); ++j) {
                    const bool logged = std::find(log_coords.begin(), log_coords.end(), j) != log_coords.end();
                    opt.coord_range.push_back(logged ? std::log(design.domain.hi[j] / design.domain.lo[j]) : design.domain.range(j));
                }
                if (n_rep > 1) opt.noise_hint = avg.emp_var.mean();
                if (config.surrogate.warm_start && last_hyper) opt.initial = last_hyper;
                auto gp = std::make_shared<GpSurrogate>(fit_gp(fit_sites, avg.means, opt));
                last_hyper = gp->hyper();
                q = gp;
            }
            if (!log_coords.empty()) q = std::make_shared<WarpedSurrogate>(q, log_coords);

            auto policy = std::make_shared<StepPolicy>(model_ptr, q, design.domain, config.intervention);
            if (config.intervention.use_zhat) policy->attach_zhat(design.unique_sites);
            fitted[k] = policy;

            double sq = 0.0;
            for (int i = 0; i < n_unique; ++i) {
                const double e = q->predict(design.unique_sites.row(i).transpose()) - avg.means(i);
                sq += e * e;
            }
            int n_acted = 0;
            for (char a : acted) n_acted += a;
            trace.k = k;
            trace.n_paths = n_unique * n_rep;
            trace.mean_response = avg.means.mean();
            trace.fraction_acted = static_cast<double>(n_acted) / trace.n_paths;
            trace.fit_diagnostics = q->diagnostics();
            trace.rmse = std::sqrt(sq / n_unique);
            trace.surrogate = q->describe();
            trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        } catch (const AbortAtStep&) {
            throw;
        } catch (const std::exception& e) {
            throw AbortAtStep(k, e.what());
        }
        result.traces.push_back(trace);
        if (config.on_step) config.on_step(trace);
    }
    result.stack = PolicyStack(model_ptr, std::move(fitted));
    return result;
}

std::function<double(const State&)> stationary_value(const PolicyStack& stack, int k_small) {
    if (k_small < 0 || k_small >= stack.steps()) throw InvalidModel("k_small out of range");
    auto policy = stack.ptr(k_small);
    return [policy](const State& x) { return policy->value(x); };
}

} // namespace irmc
