#pragma once

#include "irmc/policy.hpp"
#include "irmc/solver.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>

namespace irmc {

/// A model preset plus numeric parameter overrides.
struct ModelSpec {
    std::string preset = "federico";
    std::map<std::string, double> params;
};

struct ForwardSpec {
    int n_paths = 10000;
    std::uint64_t seed = 1;
    std::optional<State> x0;  // model x0 when unset
    bool use_zhat = false;
};

struct RunConfig {
    ModelSpec model;
    SolverConfig solver;
    ForwardSpec forward;
    BoundaryMode boundary_mode = BoundaryMode::Forward;
};

/// Defaults for a preset (designs, surrogates and optimizer suited to the problem).
RunConfig default_config(const std::string& preset);

/// Parses sectioned key = value text. Strings may be quoted; lists are
/// comma separated. Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Builds the model for a spec. Throws ConfigError on unknown presets or parameters.
std::shared_ptr<const ImpulseModel> build_model(const ModelSpec& spec);

/// Canonical JSON description of the model spec and intervention options, stored with the policy stack.
std::string stack_metadata(const RunConfig& config);
/// Recovers model spec and intervention options from stack metadata.
void apply_stack_metadata(const std::string& json, RunConfig& config);

} // namespace irmc
