#include "irmc/dynamics.hpp"

#include "irmc/errors.hpp"

#include <cmath>

namespace irmc {

PathBatch make_batch(const State& x, int n_paths, std::uint64_t seed, StreamTag tag) {
    PathBatch batch;
    batch.states.resize(n_paths, x.size());
    batch.streams.reserve(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        batch.states.row(i) = x.transpose();
        batch.streams.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(i)}));
    }
    return batch;
}

State advance(const ImpulseModel& model, const State& x, Stream& stream) {
    const double dt = model.dt;
    const double sqdt = std::sqrt(dt);
    State y = x;
    switch (model.dynamics_kind) {
        case DynamicsKind::GbmExact: {
            const double s = model.sigma;
            for (int i = 0; i < x.size(); ++i) {
                y(i) = x(i) * std::exp((model.mu - 0.5 * s * s) * dt + s * sqdt * stream.normal());
            }
            break;
        }
        case DynamicsKind::AbmExact:
            for (int i = 0; i < x.size(); ++i) y(i) = x(i) + model.mu * dt + model.sigma * sqdt * stream.normal();
            break;
        case DynamicsKind::PriceCapacity: {
            const double s = model.sigma;
            y(0) = x(0) * std::exp((model.mu - 0.5 * s * s) * dt + s * sqdt * stream.normal());
            y(1) = x(1) * std::exp(-model.decay * dt);
            break;
        }
        case DynamicsKind::EulerGeneric: {
            const State mu = model.drift(x);
            const State sig = model.vol(x);
            for (int i = 0; i < x.size(); ++i) y(i) = x(i) + mu(i) * dt + sig(i) * sqdt * stream.normal();
            break;
        }
    }
    return y;
}

PathBatch step_uncontrolled(const ImpulseModel& model, PathBatch batch) {
    if (batch.step_index >= model.steps()) throw InvalidModel("cannot step past maturity");
    for (int i = 0; i < batch.size(); ++i) {
        State x = batch.states.row(i).transpose();
        State y = advance(model, x, batch.streams[i]);
        if (!y.allFinite()) throw NonFiniteState("non-finite state after step " + std::to_string(batch.step_index));
        batch.states.row(i) = y.transpose();
    }
    ++batch.step_index;
    return batch;
}

PathBatch apply_impulse(const ImpulseModel& model, PathBatch batch, const Eigen::MatrixXd& impulses) {
    if (impulses.rows() != batch.size() || impulses.cols() != model.dim) {
        throw InadmissibleImpulse("impulse matrix shape does not match the batch");
    }
    for (int i = 0; i < batch.size(); ++i) {
        State z = impulses.row(i).transpose();
        if (!model.impulse_set.admits(z)) {
            throw InadmissibleImpulse("impulse on path " + std::to_string(i) + " violates the action set");
        }
        batch.states.row(i) += z.transpose();
    }
    return batch;
}

} // namespace irmc
