#pragma once

#include "irmc/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace irmc {

/// Stationary (s,S) solution of the 1-D GBM investment problem:
/// v(x) = B x^m + C x^gamma / gamma below the action region.
struct FedericoSolution {
    double r = 0.0, mu = 0.0, sigma = 0.0, gamma = 0.0, c0 = 0.0, c1 = 0.0;
    double m = 0.0;
    double C = 0.0;
    double B = 0.0;
    double s = 0.0;
    double S = 0.0;

    /// v(x) on the continuation region x >= s; on x < s, v(S) + c0 (S - x) + c1.
    double v(double x) const;
    double dv(double x) const;
    /// B x^m + C x^gamma / gamma without the impulse branch.
    double v_continuation(double x) const;
    double dv_continuation(double x) const;
    /// s from the closed-form inflection expression (c0 (m-1) / (C (m-gamma)))^(1/(gamma-1)).
    double inflection_formula_s() const;
};

/// Solves smooth fit at s and S (v'(s) = v'(S) = -c0) with value matching
/// v(s) = v(S) + c0 (S - s) + c1, by a one-dimensional search over B.
/// Throws InvalidParameters.
FedericoSolution federico_solution(double r, double mu, double sigma, double gamma, double c0, double c1);

struct GuthrieReference {
    double y0 = 0.224;
    double impulse_size_ref = 178.0;
    double interimpulse_years_ref = 11.0;
};

struct DpGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n = 400;
    bool log_spacing = false;
    int quadrature_nodes = 256;
};

/// Value and policy tables of the discrete DPE on a 1-D grid:
/// Q(k,x) = pi(x) dt + e^{-r dt} E[V(k+1, X')], M(k,x) = max_y Q(k,y) + kappa(x, y-x),
/// V = max(Q, M), V(K,.) = phi. Tables are [K+1 x n] (value) and [K x n] (others).
struct DpResult {
    Eigen::VectorXd grid;
    Eigen::MatrixXd value;
    Eigen::MatrixXd q;
    Eigen::MatrixXi act;
    Eigen::MatrixXd target;  // post-impulse state where act, else NaN
    double dt = 0.0;

    int steps() const { return static_cast<int>(q.rows()); }
    /// Linear interpolation (linear extrapolation outside the grid).
    double value_at(int k, double x) const;
    /// Trigger level at step k: largest acting x with an upward move (Up), smallest with a downward one (Down). NaN if none.
    double boundary(int k, Direction direction) const;
};

/// Throws UnsupportedDimension for dim != 1 and InvalidParameters for bad grids.
DpResult brute_force_dp(const ImpulseModel& model, const DpGrid& grid);

/// Gauss-Hermite nodes and weights for the standard normal (weights sum to 1).
void gauss_hermite_normal(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

} // namespace irmc
