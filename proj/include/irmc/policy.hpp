#pragma once

#include "irmc/solver.hpp"

#include <cstdint>
#include <vector>

namespace irmc {

struct ImpulseEvent {
    int path = 0;
    int step = 0;
    State pre_state;
    State impulse;
};

struct ForwardOptions {
    int n_paths = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Use the fast decision path (region cache and, where fitted, Ẑ).
    bool fast = true;
    bool use_zhat = false;
    bool keep_path_values = true;
};

/// Out-of-sample evaluation of a fitted policy from one starting state.
struct ForwardReport {
    double value_estimate = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    // Component means; they sum to value_estimate.
    double mean_running = 0.0;
    double mean_impulse = 0.0;
    double mean_terminal = 0.0;
    std::vector<ImpulseEvent> events;  // ordered by path, then step
    std::vector<double> path_values;
    double mean_interimpulse_time = 0.0;  // years; NaN without repeat impulses
    double mean_impulse_size = 0.0;       // |z| on the controlled coordinate; NaN without events
    double mean_events_per_path = 0.0;
    bool use_zhat = false;
    State x0;
};

/// Simulates fresh paths (forward stream, never the training one) under Ŷ_{0:K-1}.
ForwardReport forward_evaluate(const PolicyStack& stack, const State& x0, const ForwardOptions& options = {});

enum class BoundaryMode { Forward, Scan };

struct BoundaryPoint {
    int step = 0;
    double s = 0.0;  // NaN when missing
    double S = 0.0;  // NaN when not applicable
};

/// Per-step trigger level s_k and target S_k. Forward mode reads s_k off the
/// events (max pre-state for Up problems, min for Down); scan mode uses the
/// policy's action intervals. Throws NoEvents (forward mode without events).
std::vector<BoundaryPoint> extract_boundary(const ForwardReport& report, const PolicyStack& stack,
                                            BoundaryMode mode = BoundaryMode::Forward);

/// Trigger levels from the policies alone (scan mode).
std::vector<BoundaryPoint> scan_boundary(const PolicyStack& stack);

struct LowerBoundCheck {
    bool holds = false;
    double margin = 0.0;  // v + 3 SE - V̌
};

LowerBoundCheck lower_bound_check(const ForwardReport& report, double analytic_value);

} // namespace irmc
