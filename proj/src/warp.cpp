#include "irmc/errors.hpp"
#include "irmc/surrogate.hpp"

#include <cmath>
#include <sstream>

namespace irmc {

WarpedSurrogate::WarpedSurrogate(SurrogatePtr inner, std::vector<int> log_coords)
    : inner_(std::move(inner)), log_coords_(std::move(log_coords)) {
    if (!inner_) throw InvalidParameters("warped surrogate needs an inner fit");
    for (int j : log_coords_)
        if (j < 0 || j >= inner_->dim()) throw InvalidParameters("log coordinate out of range");
}

State WarpedSurrogate::warp(const State& x, const std::vector<int>& log_coords) {
    State u = x;
    for (int j : log_coords) {
        if (!(x(j) > 0.0)) throw NonFiniteState("log-warped coordinate must be positive");
        u(j) = std::log(x(j));
    }
    return u;
}

Eigen::MatrixXd WarpedSurrogate::warp(const Eigen::MatrixXd& x, const std::vector<int>& log_coords) {
    Eigen::MatrixXd u = x;
    for (int j : log_coords) {
        if (!(x.col(j).array() > 0.0).all()) throw DomainDegenerate("log-warped coordinate must be positive");
        u.col(j) = x.col(j).array().log().matrix();
    }
    return u;
}

double WarpedSurrogate::predict(const State& x) const { return inner_->predict(warp(x, log_coords_)); }

State WarpedSurrogate::gradient(const State& x) const {
    State g = inner_->gradient(warp(x, log_coords_));
    for (int j : log_coords_) g(j) /= x(j);
    return g;
}

std::vector<double> WarpedSurrogate::coefficients() const {
    std::vector<double> c{static_cast<double>(dim()), static_cast<double>(log_coords_.size())};
    for (int j : log_coords_) c.push_back(j);
    c.push_back(static_cast<double>(static_cast<std::uint32_t>(inner_->kind())));
    const auto inner = inner_->coefficients();
    c.insert(c.end(), inner.begin(), inner.end());
    return c;
}

std::string WarpedSurrogate::describe() const {
    std::ostringstream os;
    os << "log[";
    for (std::size_t i = 0; i < log_coords_.size(); ++i) os << (i ? "," : "") << log_coords_[i];
    os << "] " << inner_->describe();
    return os.str();
}

} // namespace irmc
