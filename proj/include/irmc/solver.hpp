#pragma once

#include "irmc/design.hpp"
#include "irmc/intervention.hpp"
#include "irmc/model.hpp"
#include "irmc/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace irmc {

/// How many simulated steps feed each regression response.
struct Lookahead {
    enum class Kind { OneStep, FixedW, ToMaturity } kind = Kind::ToMaturity;
    int w = 1;

    static Lookahead one_step() { return {Kind::OneStep, 1}; }
    static Lookahead fixed(int w) { return {Kind::FixedW, w}; }
    static Lookahead to_maturity() { return {Kind::ToMaturity, 0}; }

    /// Number of steps simulated from step k when the horizon has K steps.
    int steps_from(int k, int K) const;
};

struct SurrogateSpec {
    SurrogateKind kind = SurrogateKind::Tps;
    KernelKind kernel = KernelKind::SquaredExponential;
    LambdaMode lambda = LambdaMode::gcv();
    TpsKernel tps_kernel = TpsKernel::ThinPlate;
    int restarts = 3;
    int max_evals = 400;
    /// Start each GP fit from the previous step's hyperparameters as well.
    bool warm_start = true;
    /// Inputs fitted on a log scale.
    std::vector<int> log_coords;
};

struct StepTrace {
    int k = 0;
    int n_paths = 0;
    double mean_response = 0.0;
    double fraction_acted = 0.0;  // share of training paths with at least one impulse
    std::vector<double> fit_diagnostics;
    double rmse = 0.0;  // in-sample, against the pre-averaged responses
    double seconds = 0.0;
    std::string surrogate;
};

struct SolverConfig {
    Lookahead lookahead = Lookahead::to_maturity();
    bool mpc_mode = false;
    DesignSpec design;
    SurrogateSpec surrogate;
    InterventionOptions intervention;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Replicate r draws the same noise at every site of a step.
    bool common_random_numbers = false;
    /// Replicates 2j and 2j+1 of a site use mirrored normal draws.
    bool antithetic = true;
    /// Called after each step is fitted.
    std::function<void(const StepTrace&)> on_step;

    /// Throws InvalidModel for inconsistent settings.
    void validate(int K) const;
};

/// Fitted policies for k = 0..K-1; Q̂(K,·) is the terminal value.
class PolicyStack {
public:
    PolicyStack() = default;
    PolicyStack(std::shared_ptr<const ImpulseModel> model, std::vector<std::shared_ptr<const StepPolicy>> steps);

    int steps() const { return static_cast<int>(steps_.size()); }
    int dim() const { return model_->dim; }
    const ImpulseModel& model() const { return *model_; }
    const std::shared_ptr<const ImpulseModel>& model_ptr() const { return model_; }
    const StepPolicy& at(int k) const { return *steps_.at(static_cast<std::size_t>(k)); }
    const std::shared_ptr<const StepPolicy>& ptr(int k) const { return steps_.at(static_cast<std::size_t>(k)); }

    /// V(k,x) = max(Q̂, M̂) for k < K and φ(x) at k = K.
    double value(int k, const State& x) const;

private:
    std::shared_ptr<const ImpulseModel> model_;
    std::vector<std::shared_ptr<const StepPolicy>> steps_;
};

struct SolveResult {
    PolicyStack stack;
    std::vector<StepTrace> traces;  // in fitting order k = K-1, ..., 0
};

/// Backward induction over k = K-1, ..., 0. Errors are rethrown as AbortAtStep.
SolveResult solve(std::shared_ptr<const ImpulseModel> model, const SolverConfig& config);

/// Infinite-horizon approximation x -> V(k_small, x).
std::function<double(const State&)> stationary_value(const PolicyStack& stack, int k_small);

/// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

} // namespace irmc
