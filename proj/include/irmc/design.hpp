#pragma once

#include "irmc/types.hpp"

#include <cstdint>
#include <vector>

namespace irmc {

enum class DesignScheme { ExplicitLattice, IidUniform, LatinHypercube, Sobol };

/// Training inputs for one time step: each unique site is simulated n_rep times.
struct TrainingDesign {
    Eigen::MatrixXd unique_sites;  // [n_unique x dim]
    int n_rep = 1;
    DesignScheme scheme = DesignScheme::IidUniform;
    Box domain;

    int n_unique() const { return static_cast<int>(unique_sites.rows()); }
    int total() const { return n_unique() * n_rep; }
};

/// Geometric widening of one coordinate's domain with time, for non-stationary
/// states: [center * exp(-(base + n_sd * vol * sqrt(t))), center * exp(base + n_sd * vol * sqrt(t))].
struct GeometricSpread {
    int coord = 0;
    double center = 1.0;
    double base_log_width = 0.5;
    double vol = 0.0;
    double n_sd = 2.0;
};

/// Everything needed to rebuild the design of any step k.
struct DesignSpec {
    DesignScheme scheme = DesignScheme::ExplicitLattice;
    Box domain;
    int n_unique = 100;
    int n_rep = 1;
    Eigen::MatrixXd explicit_sites;  // used by ExplicitLattice
    bool scramble = true;            // Sobol digital shift
    std::vector<GeometricSpread> spreads;
    /// Coordinates sampled log-uniformly by the random schemes (bounds must be positive).
    std::vector<int> log_coords;

    /// Domain at time t after applying the spreads.
    Box domain_at(double t) const;
};

/// Builds a design on `domain`. Deterministic given its arguments.
/// Throws DomainDegenerate or TooFewSites.
TrainingDesign build_design(DesignScheme scheme, const Box& domain, int n_unique, int n_rep, std::uint64_t seed,
                            const Eigen::MatrixXd& explicit_sites = {}, bool scramble = true);

/// Design for step k at time t; Sobol/uniform/LHS draws are keyed by (seed, k).
TrainingDesign build_design_for_step(const DesignSpec& spec, int k, double t, std::uint64_t seed);

struct PreAveraged {
    Eigen::VectorXd means;
    Eigen::VectorXd emp_var;  // unbiased sample variance; 0 when n_rep == 1
};

/// Row-wise mean and sample variance of replicated responses [n_unique x n_rep].
PreAveraged pre_average(const Eigen::MatrixXd& responses);

/// n equally spaced values from a to b inclusive.
Eigen::VectorXd linspace(double a, double b, int n);

/// The non-uniform lattice dense on [1,18] and sparse on [18.2,90].
Eigen::MatrixXd federico_lattice();

/// Exact star discrepancy of points in [0,1]^d (d <= 2), O(n^(d+1)).
double star_discrepancy(const Eigen::MatrixXd& unit_points);

} // namespace irmc
