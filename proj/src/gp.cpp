#include "irmc/errors.hpp"
#include "irmc/rng.hpp"
#include "irmc/surrogate.hpp"

#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace irmc {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kLog2Pi = 1.83787706640934548356;

State inverse_sq_lengths(const State& l) {
    State inv(l.size());
    for (int i = 0; i < l.size(); ++i) inv(i) = 1.0 / (l(i) * l(i));
    return inv;
}

// Scaled squared distance sum_i (a_i - b_i)^2 / l_i^2.
template <class A, class B>
double scaled_sq(const A& a, const B& b, const State& inv_l2) {
    double s = 0.0;
    for (int i = 0; i < inv_l2.size(); ++i) {
        const double d = a(i) - b(i);
        s += d * d * inv_l2(i);
    }
    return s;
}

double kernel_of_sq(double r2, double pvar, KernelKind kind) {
    if (kind == KernelKind::SquaredExponential) return pvar * std::exp(-0.5 * r2);
    const double r = std::sqrt(r2);
    return pvar * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * std::exp(-kSqrt5 * r);
}

// dk/d(r2) * 2, so that dk/dx_i = -factor * (x_i - x'_i) / l_i^2.
double kernel_grad_factor(double r2, double pvar, KernelKind kind) {
    if (kind == KernelKind::SquaredExponential) return pvar * std::exp(-0.5 * r2);
    const double r = std::sqrt(r2);
    return pvar * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x, const GpHyper& h, KernelKind kind) {
    const auto n = x.rows();
    const State inv = inverse_sq_lengths(h.lengthscale);
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = h.process_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel_of_sq(scaled_sq(x.row(i), x.row(j), inv), h.process_var, kind);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

struct Factorized {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double nugget = 0.0;
    bool ok = false;
};

Factorized factorize(const Eigen::MatrixXd& kmat, const GpHyper& h, const Eigen::VectorXd& noise_scale) {
    Factorized f;
    Eigen::MatrixXd a = kmat;
    a.diagonal() += h.noise_var * noise_scale;
    double nugget = 1e-8 * h.process_var;
    const double max_nugget = 1e-2 * h.process_var;
    while (nugget <= max_nugget * (1.0 + 1e-12)) {
        Eigen::MatrixXd b = a;
        b.diagonal().array() += nugget;
        f.llt.compute(b);
        if (f.llt.info() == Eigen::Success) {
            // LLT reports success on tiny negative pivots only through NaN; check the factor.
            const auto d = f.llt.matrixLLT().diagonal();
            if (d.allFinite() && (d.array() > 0.0).all()) {
                f.nugget = nugget;
                f.ok = true;
                return f;
            }
        }
        nugget *= 10.0;
    }
    return f;
}

struct Conditioned {
    double beta0 = 0.0;
    Eigen::VectorXd alpha;
    double nll = 0.0;
};

Conditioned condition(const Factorized& f, const Eigen::VectorXd& y) {
    const auto n = y.size();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd ai1 = f.llt.solve(ones);
    const Eigen::VectorXd aiy = f.llt.solve(y);
    Conditioned c;
    c.beta0 = ones.dot(aiy) / ones.dot(ai1);
    c.alpha = aiy - c.beta0 * ai1;
    const Eigen::VectorXd resid = y.array() - c.beta0;
    const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
    c.nll = 0.5 * resid.dot(c.alpha) + 0.5 * logdet + 0.5 * static_cast<double>(n) * kLog2Pi;
    return c;
}

Eigen::VectorXd default_noise_scale(const Eigen::VectorXd& s, Eigen::Index n) {
    if (s.size() == 0) return Eigen::VectorXd::Ones(n);
    if (s.size() != n) throw DegenerateDesign("noise_scale length does not match the data");
    return s;
}

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw DegenerateDesign("x and y have different lengths");
    if (x.cols() < 1 || x.cols() > kMaxDim) throw UnsupportedDimension("GP input dimension must be 1 or 2");
    if (!x.allFinite() || !y.allFinite()) throw DegenerateDesign("non-finite training data");
}

} // namespace

GpSurrogate::GpSurrogate(Eigen::MatrixXd x, Eigen::VectorXd y, GpHyper hyper, KernelKind kernel,
                         Eigen::VectorXd noise_scale)
    : x_(std::move(x)), hyper_(std::move(hyper)), kernel_(kernel) {
    check_inputs(x_, y);
    if (hyper_.lengthscale.size() != x_.cols()) throw InvalidParameters("lengthscale has the wrong dimension");
    const Eigen::VectorXd ns = default_noise_scale(noise_scale, y.size());
    const Factorized f = factorize(kernel_matrix(x_, hyper_, kernel_), hyper_, ns);
    if (!f.ok) throw CholeskyFailure("covariance matrix is not positive definite at maximum nugget");
    const Conditioned c = condition(f, y);
    alpha_ = c.alpha;
    beta0_ = c.beta0;
    nugget_ = f.nugget;
    nll_ = c.nll;
    inv_l2_ = inverse_sq_lengths(hyper_.lengthscale);
}

GpSurrogate GpSurrogate::from_parts(Eigen::MatrixXd x, Eigen::VectorXd alpha, GpHyper hyper, KernelKind kernel,
                                    double beta0, double nugget) {
    GpSurrogate g;
    g.x_ = std::move(x);
    g.alpha_ = std::move(alpha);
    g.hyper_ = std::move(hyper);
    g.kernel_ = kernel;
    g.beta0_ = beta0;
    g.nugget_ = nugget;
    g.nll_ = std::numeric_limits<double>::quiet_NaN();
    g.inv_l2_ = inverse_sq_lengths(g.hyper_.lengthscale);
    return g;
}

double GpSurrogate::kernel_value(const State& a, const State& b) const {
    return kernel_of_sq(scaled_sq(a, b, inv_l2_), hyper_.process_var, kernel_);
}

double GpSurrogate::predict(const State& x) const {
    double s = beta0_;
    const auto n = x_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        s += alpha_(i) * kernel_of_sq(scaled_sq(x, x_.row(i), inv_l2_), hyper_.process_var, kernel_);
    }
    return s;
}

State GpSurrogate::gradient(const State& x) const {
    const int d = dim();
    State g = State::Zero(d);
    const auto n = x_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = alpha_(i) * kernel_grad_factor(scaled_sq(x, x_.row(i), inv_l2_), hyper_.process_var, kernel_);
        for (int j = 0; j < d; ++j) g(j) -= f * (x(j) - x_(i, j)) * inv_l2_(j);
    }
    return g;
}

// Layout: dim, kernel, n, beta0, nugget, process_var, noise_var, lengthscale[dim], x[n*dim], alpha[n].
std::vector<double> GpSurrogate::coefficients() const {
    const int d = dim();
    const auto n = x_.rows();
    std::vector<double> c;
    c.reserve(7 + d + n * (d + 1));
    c.push_back(d);
    c.push_back(static_cast<double>(kernel_));
    c.push_back(static_cast<double>(n));
    c.push_back(beta0_);
    c.push_back(nugget_);
    c.push_back(hyper_.process_var);
    c.push_back(hyper_.noise_var);
    for (int j = 0; j < d; ++j) c.push_back(hyper_.lengthscale(j));
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) c.push_back(x_(i, j));
    for (Eigen::Index i = 0; i < n; ++i) c.push_back(alpha_(i));
    return c;
}

std::string GpSurrogate::describe() const {
    std::ostringstream os;
    os << (kernel_ == KernelKind::SquaredExponential ? "gp-se" : "gp-matern52") << " n=" << x_.rows() << " l=(";
    for (int j = 0; j < dim(); ++j) os << (j ? "," : "") << hyper_.lengthscale(j);
    os << ") sp2=" << hyper_.process_var << " se2=" << hyper_.noise_var << " beta0=" << beta0_;
    return os.str();
}

std::vector<double> GpSurrogate::diagnostics() const {
    std::vector<double> d(hyper_.lengthscale.data(), hyper_.lengthscale.data() + dim());
    d.push_back(hyper_.process_var);
    d.push_back(hyper_.noise_var);
    return d;
}

double gp_neg_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyper& hyper,
                             KernelKind kernel, const Eigen::VectorXd& noise_scale) {
    check_inputs(x, y);
    const Factorized f = factorize(kernel_matrix(x, hyper, kernel), hyper, default_noise_scale(noise_scale, y.size()));
    if (!f.ok) return std::numeric_limits<double>::infinity();
    return condition(f, y).nll;
}

GpSurrogate fit_gp(const Eigen::MatrixXd& x_in, const Eigen::VectorXd& y_in, const GpFitOptions& options) {
    check_inputs(x_in, y_in);
    const int d = static_cast<int>(x_in.cols());
    const Eigen::VectorXd ns_in = default_noise_scale(options.noise_scale, y_in.size());

    // Merge exact duplicates: equal responses combine their noise weights.
    std::map<std::vector<double>, int> index;
    std::vector<int> first_of;
    std::vector<double> precision;
    for (Eigen::Index i = 0; i < x_in.rows(); ++i) {
        std::vector<double> key(d);
        for (int j = 0; j < d; ++j) key[j] = x_in(i, j);
        auto [it, inserted] = index.emplace(key, static_cast<int>(first_of.size()));
        if (inserted) {
            first_of.push_back(static_cast<int>(i));
            precision.push_back(1.0 / std::max(ns_in(i), 1e-300));
        } else {
            const int g = it->second;
            if (y_in(first_of[g]) != y_in(i)) throw DegenerateDesign("duplicate sites with conflicting responses");
            precision[g] += 1.0 / std::max(ns_in(i), 1e-300);
        }
    }
    const auto n = static_cast<Eigen::Index>(first_of.size());
    if (n < 5) throw TooFewSites("GP fit needs at least 5 distinct sites");
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n), ns(n);
    for (Eigen::Index g = 0; g < n; ++g) {
        x.row(g) = x_in.row(first_of[g]);
        y(g) = y_in(first_of[g]);
        ns(g) = 1.0 / precision[g];
    }

    const double mean = y.mean();
    double var = (y.array() - mean).square().mean();
    if (!(var > 0.0)) var = 1e-12 * std::max(1.0, mean * mean);

    std::vector<double> lo(d + 2), hi(d + 2);
    for (int j = 0; j < d; ++j) {
        double range = (static_cast<int>(options.coord_range.size()) > j) ? options.coord_range[j]
                                                                          : x.col(j).maxCoeff() - x.col(j).minCoeff();
        if (!(range > 0.0)) range = 1.0;
        lo[j] = std::log(0.05 * range);
        hi[j] = std::log(5.0 * range);
    }
    lo[d] = std::log(1e-4 * var);
    hi[d] = std::log(1e4 * var);
    lo[d + 1] = std::log(1e-8 * var);
    hi[d + 1] = std::log(var);

    auto to_hyper = [&](const Eigen::VectorXd& u) {
        GpHyper h;
        h.lengthscale.resize(d);
        for (int j = 0; j < d; ++j) h.lengthscale(j) = std::exp(lo[j] + u(j) * (hi[j] - lo[j]));
        h.process_var = std::exp(lo[d] + u(d) * (hi[d] - lo[d]));
        h.noise_var = std::exp(lo[d + 1] + u(d + 1) * (hi[d + 1] - lo[d + 1]));
        return h;
    };
    auto to_unit = [&](const GpHyper& h) {
        Eigen::VectorXd u(d + 2);
        auto put = [&](int i, double v) { u(i) = std::clamp((std::log(v) - lo[i]) / (hi[i] - lo[i]), 0.0, 1.0); };
        for (int j = 0; j < d; ++j) put(j, h.lengthscale(j));
        put(d, h.process_var);
        put(d + 1, h.noise_var);
        return u;
    };
    auto objective = [&](const Eigen::VectorXd& u) {
        const double v = gp_neg_log_likelihood(x, y, to_hyper(u), options.kernel, ns);
        return std::isfinite(v) ? v : 1e300;
    };

    std::vector<Eigen::VectorXd> starts;
    if (options.initial && options.initial->lengthscale.size() == d) starts.push_back(to_unit(*options.initial));
    {
        GpHyper h;
        h.lengthscale.resize(d);
        for (int j = 0; j < d; ++j) h.lengthscale(j) = 0.3 * std::exp(lo[j]) / 0.05;
        h.process_var = var;
        h.noise_var = options.noise_hint > 0.0 ? options.noise_hint : 1e-2 * var;
        starts.push_back(to_unit(h));
    }
    Xoshiro256pp rng(derive_seed(options.seed, {static_cast<std::uint64_t>(StreamTag::Fit)}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n_starts = std::max(options.restarts, 1) + (options.initial ? 1 : 0);
    while (static_cast<int>(starts.size()) < n_starts) {
        Eigen::VectorXd u(d + 2);
        for (int i = 0; i < d + 2; ++i) u(i) = unif(rng);
        starts.push_back(u);
    }

    Eigen::VectorXd best_u;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        const auto r = detail::nelder_mead_unit_box(objective, s, 0.15, options.max_evals);
        if (r.value < best) {
            best = r.value;
            best_u = r.x;
        }
    }
    return GpSurrogate(std::move(x), std::move(y), to_hyper(best_u), options.kernel, std::move(ns));
}

} // namespace irmc
