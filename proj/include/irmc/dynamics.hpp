#pragma once

#include "irmc/model.hpp"
#include "irmc/rng.hpp"

#include <vector>

namespace irmc {

/// A batch of paths at a common step, each with its own random substream.
struct PathBatch {
    Eigen::MatrixXd states;  // [n_paths x dim]
    int step_index = 0;
    std::vector<Stream> streams;  // one per path

    int size() const { return static_cast<int>(states.rows()); }
};

/// Batch of n copies of x, with substream i seeded from (seed, tag, i).
PathBatch make_batch(const State& x, int n_paths, std::uint64_t seed, StreamTag tag);

/// Advance one state by one period of the uncontrolled dynamics.
/// Exact for GBM/ABM/price-capacity; Euler step with independent noise per
/// coordinate otherwise.
State advance(const ImpulseModel& model, const State& x, Stream& stream);

/// Advance every path one step without impulses. Throws NonFiniteState.
PathBatch step_uncontrolled(const ImpulseModel& model, PathBatch batch);

/// Add impulses (row i for path i) to the states. Throws InadmissibleImpulse.
PathBatch apply_impulse(const ImpulseModel& model, PathBatch batch, const Eigen::MatrixXd& impulses);

} // namespace irmc
