#pragma once

#include "irmc/model.hpp"
#include "irmc/surrogate.hpp"

#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace irmc {

enum class OptimizerMode { LinearRootSearch, GridThenPolish, TargetState };

struct InterventionOptions {
    OptimizerMode mode = OptimizerMode::GridThenPolish;
    int grid_points = 64;
    int polish_iters = 30;
    /// Points scanned for sign changes of the gradient condition.
    int root_scan_points = 256;
    /// Relative tie tolerance: act only if M > Q + tie_rel * (1 + |Q|).
    double tie_rel = 1e-9;
    /// Grid size for the 1-D action-region cache (0 disables it).
    int cache_points = 2048;
    bool use_zhat = false;
};

/// Ŷ_k(x) together with the values that produced it.
struct ActionDecision {
    bool act = false;
    State impulse;  // zero when not acting
    double m_value = 0.0;
    double q_value = 0.0;
};

/// Linear-cost target S*_k, the root of dQ/dy + c0 maximizing Q(y) + c0 y.
struct TargetLevel {
    double s_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    /// Every local maximizer of Q(y) + c0 y found by the scan, with its value.
    std::vector<double> roots;
    std::vector<double> root_values;
};

double tie_eps(double q, double rel);

/// Root search on the controllable coordinate `coord`, other coordinates held at `base`.
/// Throws BracketFailure when the gradient never crosses -c0 from above on [lo, hi].
TargetLevel find_target(const Surrogate& q, double c0, double lo, double hi, const State& base, int coord,
                        int scan_points = 256);

/// M̂(k,x) and Ŷ_k(x) for one state. Targets are confined to `domain`; Q̂(x) is
/// read at x clamped to `domain`. `target` may carry a precomputed S*_k.
ActionDecision intervention_value(const ImpulseModel& model, const Surrogate& q, const Box& domain, const State& x,
                                  const InterventionOptions& options, const TargetLevel* target = nullptr);

/// Auxiliary regression Ẑ of the optimal impulse amount on state.
struct ZSurrogate {
    SurrogatePtr fit;
};

ZSurrogate fit_impulse_surrogate(const Eigen::MatrixXd& x_sites, const Eigen::VectorXd& z_opt);
double predict_impulse(const ZSurrogate& zs, const State& x);

/// The feedback policy of one step: Q̂(k,·), its domain and a cache of the
/// action region. Immutable after construction and safe to share.
class StepPolicy {
public:
    StepPolicy(std::shared_ptr<const ImpulseModel> model, SurrogatePtr q, Box domain, InterventionOptions options);

    const Surrogate& surrogate() const { return *q_; }
    const SurrogatePtr& surrogate_ptr() const { return q_; }
    const Box& domain() const { return domain_; }
    const InterventionOptions& options() const { return options_; }
    const std::optional<TargetLevel>& target() const { return target_; }
    const std::optional<ZSurrogate>& zhat() const { return zhat_; }

    /// Q̂(k,x) at x clamped to the domain.
    double q_value(const State& x) const;
    /// Full optimization.
    ActionDecision decide(const State& x) const;
    /// Same decision through the region cache, and through Ẑ when requested
    /// (by `use_zhat` or the options) and fitted. Values not needed for the
    /// decision are NaN.
    ActionDecision decide_fast(const State& x) const { return decide_fast(x, options_.use_zhat); }
    ActionDecision decide_fast(const State& x, bool use_zhat) const;
    /// max(Q̂, M̂) at x.
    double value(const State& x) const;

    /// Intervals of the first controllable coordinate where the policy acts (1-D only; empty otherwise).
    const std::vector<std::pair<double, double>>& action_intervals() const { return intervals_; }
    bool has_cache() const { return cached_; }

    /// Fit Ẑ from exact decisions at the given sites.
    void attach_zhat(const Eigen::MatrixXd& sites);
    /// Install a previously fitted Ẑ (used when loading a stored stack).
    void set_zhat(ZSurrogate z) { zhat_ = std::move(z); }

private:
    ActionDecision decide_with_target(const State& x, double target_coord) const;

    std::shared_ptr<const ImpulseModel> model_;
    SurrogatePtr q_;
    Box domain_;
    InterventionOptions options_;
    std::optional<TargetLevel> target_;
    std::optional<ZSurrogate> zhat_;
    std::vector<std::pair<double, double>> intervals_;
    bool cached_ = false;
    double q_at_target_ = 0.0;  // Q̂ at the fixed target (TargetState mode)
};

} // namespace irmc
