#pragma once

#include <Eigen/Dense>

#include <vector>

namespace irmc {

inline constexpr int kMaxDim = 2;

/// A point in state space. Stack-allocated; dimension is 1 or 2.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline State make_state(double x) {
    State s(1);
    s(0) = x;
    return s;
}

inline State make_state(double x, double y) {
    State s(2);
    s << x, y;
    return s;
}

/// Axis-aligned box, one [lo, hi] interval per coordinate.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lower, std::vector<double> upper) : lo(std::move(lower)), hi(std::move(upper)) {}

    int dim() const { return static_cast<int>(lo.size()); }
    double range(int i) const { return hi[i] - lo[i]; }

    bool contains(const State& x) const {
        for (int i = 0; i < dim(); ++i) {
            if (x(i) < lo[i] || x(i) > hi[i]) return false;
        }
        return true;
    }

    State clamp(const State& x) const {
        State y = x;
        for (int i = 0; i < dim(); ++i) {
            y(i) = y(i) < lo[i] ? lo[i] : (y(i) > hi[i] ? hi[i] : y(i));
        }
        return y;
    }
};

} // namespace irmc
