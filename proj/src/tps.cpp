#include "irmc/errors.hpp"
#include "irmc/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace irmc {

double tps_phi(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

double tps_phi_derivative_1d(double u) {
    const double a = std::abs(u);
    return a > 0.0 ? u * (2.0 * std::log(a) + 1.0) : 0.0;
}

namespace {

double phi(double r, TpsKernel k) { return k == TpsKernel::ThinPlate ? tps_phi(r) : r * r * r; }

// phi'(r) / r, the factor multiplying (x - x_n) in the gradient.
double phi_grad_factor(double r, TpsKernel k) {
    if (!(r > 0.0)) return 0.0;
    return k == TpsKernel::ThinPlate ? 2.0 * std::log(r) + 1.0 : 3.0 * r;
}

template <class A, class B>
double dist(const A& a, const B& b, int d) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        const double t = a(j) - b(j);
        s += t * t;
    }
    return std::sqrt(s);
}

struct GcvTerms {
    double gcv;
    double df;
};

GcvTerms gcv_at(const TpsFactorization& f, const Eigen::VectorXd& w, double lambda, Eigen::Index n) {
    double tr = 0.0, rss = 0.0;
    for (Eigen::Index i = 0; i < f.eig.size(); ++i) {
        const double shrink = lambda / (f.eig(i) + lambda);
        tr += shrink;
        rss += shrink * shrink * w(i) * w(i);
    }
    const double gcv = tr > 0.0 ? static_cast<double>(n) * rss / (tr * tr) : std::numeric_limits<double>::infinity();
    return {gcv, static_cast<double>(n) - tr};
}

} // namespace

bool TpsFactorization::same_sites(const Eigen::MatrixXd& x, TpsKernel k) const {
    if (k != kernel || x.rows() != knots.rows() || x.cols() != knots.cols()) return false;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (std::abs((x(i, j) - offset(j)) / scale(j) - knots(i, j)) > 1e-14) return false;
    return true;
}

TpsFactorization factorize_tps(const Eigen::MatrixXd& x, TpsKernel kernel) {
    const auto n = x.rows();
    const int d = static_cast<int>(x.cols());
    if (d < 1 || d > kMaxDim) throw UnsupportedDimension("TPS input dimension must be 1 or 2");
    if (n < d + 3) throw TooFewSites("TPS needs at least " + std::to_string(d + 3) + " sites");
    if (!x.allFinite()) throw SingularSystem("non-finite TPS sites");

    TpsFactorization f;
    f.kernel = kernel;
    f.offset.resize(d);
    f.scale.resize(d);
    for (int j = 0; j < d; ++j) {
        const double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
        f.offset(j) = lo;
        f.scale(j) = hi > lo ? hi - lo : 1.0;
    }
    f.knots.resize(n, d);
    for (int j = 0; j < d; ++j) f.knots.col(j) = ((x.col(j).array() - f.offset(j)) / f.scale(j)).matrix();

    f.kmat.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f.kmat(i, i) = 0.0;
        for (Eigen::Index k = 0; k < i; ++k) {
            const double v = phi(dist(f.knots.row(i), f.knots.row(k), d), kernel);
            f.kmat(i, k) = v;
            f.kmat(k, i) = v;
        }
    }

    Eigen::MatrixXd t(n, d + 1);
    t.col(0).setOnes();
    t.rightCols(d) = f.knots;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(t);
    const Eigen::MatrixXd q = qr.householderQ();
    f.r = qr.matrixQR().topRows(d + 1).triangularView<Eigen::Upper>();
    const double rmax = f.r.diagonal().cwiseAbs().maxCoeff();
    if (f.r.diagonal().cwiseAbs().minCoeff() <= 1e-10 * std::max(rmax, 1.0)) {
        throw SingularSystem("TPS sites are collinear");
    }
    f.q1 = q.leftCols(d + 1);
    const Eigen::MatrixXd q2 = q.rightCols(n - d - 1);
    const Eigen::MatrixXd b = q2.transpose() * f.kmat * q2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b + b.transpose()));
    if (es.info() != Eigen::Success) throw SingularSystem("eigendecomposition of the TPS system failed");
    f.eig = es.eigenvalues();
    f.q2u = q2 * es.eigenvectors();
    return f;
}

TpsSurrogate fit_tps(const TpsFactorization& f, const Eigen::VectorXd& y, LambdaMode mode) {
    const auto n = f.knots.rows();
    if (y.size() != n) throw SingularSystem("response length does not match the TPS sites");
    if (!y.allFinite()) throw SingularSystem("non-finite TPS responses");
    const Eigen::VectorXd w = f.q2u.transpose() * y;

    double lambda = mode.lambda;
    if (mode.kind == LambdaMode::Kind::Gcv) {
        const double dmax = std::max(f.eig.cwiseAbs().maxCoeff(), 1e-300);
        constexpr int kGrid = 30;
        const double lo = std::log(dmax * 1e-12), hi = std::log(dmax * 1e2);
        std::vector<double> grid(kGrid), score(kGrid);
        int best = 0;
        for (int i = 0; i < kGrid; ++i) {
            grid[i] = lo + (hi - lo) * i / (kGrid - 1);
            score[i] = gcv_at(f, w, std::exp(grid[i]), n).gcv;
            if (score[i] < score[best]) best = i;
        }
        // golden-section polish between the grid neighbours of the best value
        double a = grid[std::max(best - 1, 0)], b = grid[std::min(best + 1, kGrid - 1)];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), e = a + g * (b - a);
        double fc = gcv_at(f, w, std::exp(c), n).gcv, fe = gcv_at(f, w, std::exp(e), n).gcv;
        for (int it = 0; it < 40; ++it) {
            if (fc < fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = gcv_at(f, w, std::exp(c), n).gcv;
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = gcv_at(f, w, std::exp(e), n).gcv;
            }
        }
        const double polished = 0.5 * (a + b);
        lambda = gcv_at(f, w, std::exp(polished), n).gcv <= score[best] ? std::exp(polished) : std::exp(grid[best]);
    }
    if (!(lambda >= 0.0)) throw SingularSystem("lambda must be non-negative");

    Eigen::VectorXd gamma(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double den = f.eig(i) + lambda;
        if (!(std::abs(den) > 1e-300)) throw SingularSystem("TPS system is singular at this lambda");
        gamma(i) = w(i) / den;
    }
    TpsSurrogate s;
    s.alpha_ = f.q2u * gamma;
    const Eigen::VectorXd rhs = f.q1.transpose() * (y - f.kmat * s.alpha_ - lambda * s.alpha_);
    s.beta_ = f.r.triangularView<Eigen::Upper>().solve(rhs);
    s.knots_ = f.knots;
    s.offset_ = f.offset;
    s.scale_ = f.scale;
    s.lambda_ = lambda;
    s.kernel_ = f.kernel;
    double tr = 0.0;
    for (Eigen::Index i = 0; i < f.eig.size(); ++i) tr += lambda / (f.eig(i) + lambda);
    s.df_ = static_cast<double>(n) - tr;
    return s;
}

TpsSurrogate fit_tps(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, LambdaMode mode, TpsKernel kernel) {
    if (x.rows() != y.size()) throw SingularSystem("x and y have different lengths");
    return fit_tps(factorize_tps(x, kernel), y, mode);
}

TpsSurrogate TpsSurrogate::from_parts(Eigen::MatrixXd knots, Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                      State offset, State scale, double lambda, double df, TpsKernel kernel) {
    TpsSurrogate s;
    s.knots_ = std::move(knots);
    s.alpha_ = std::move(alpha);
    s.beta_ = std::move(beta);
    s.offset_ = std::move(offset);
    s.scale_ = std::move(scale);
    s.lambda_ = lambda;
    s.df_ = df;
    s.kernel_ = kernel;
    return s;
}

double TpsSurrogate::predict(const State& x) const {
    const int d = dim();
    State u(d);
    for (int j = 0; j < d; ++j) u(j) = (x(j) - offset_(j)) / scale_(j);
    double v = beta_(0);
    for (int j = 0; j < d; ++j) v += beta_(j + 1) * u(j);
    const auto n = knots_.rows();
    for (Eigen::Index i = 0; i < n; ++i) v += alpha_(i) * phi(dist(u, knots_.row(i), d), kernel_);
    return v;
}

State TpsSurrogate::gradient(const State& x) const {
    const int d = dim();
    State u(d);
    for (int j = 0; j < d; ++j) u(j) = (x(j) - offset_(j)) / scale_(j);
    State g(d);
    for (int j = 0; j < d; ++j) g(j) = beta_(j + 1);
    const auto n = knots_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fac = alpha_(i) * phi_grad_factor(dist(u, knots_.row(i), d), kernel_);
        if (fac == 0.0) continue;
        for (int j = 0; j < d; ++j) g(j) += fac * (u(j) - knots_(i, j));
    }
    for (int j = 0; j < d; ++j) g(j) /= scale_(j);
    return g;
}

// Layout: dim, kernel, n, lambda, df, offset[dim], scale[dim], beta[dim+1], knots[n*dim], alpha[n].
std::vector<double> TpsSurrogate::coefficients() const {
    const int d = dim();
    const auto n = knots_.rows();
    std::vector<double> c;
    c.reserve(5 + 3 * d + 1 + n * (d + 1));
    c.push_back(d);
    c.push_back(static_cast<double>(kernel_));
    c.push_back(static_cast<double>(n));
    c.push_back(lambda_);
    c.push_back(df_);
    for (int j = 0; j < d; ++j) c.push_back(offset_(j));
    for (int j = 0; j < d; ++j) c.push_back(scale_(j));
    for (int j = 0; j <= d; ++j) c.push_back(beta_(j));
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) c.push_back(knots_(i, j));
    for (Eigen::Index i = 0; i < n; ++i) c.push_back(alpha_(i));
    return c;
}

std::string TpsSurrogate::describe() const {
    std::ostringstream os;
    os << (kernel_ == TpsKernel::ThinPlate ? "tps" : "tps-cubic") << " n=" << knots_.rows() << " lambda=" << lambda_
       << " df=" << df_;
    return os.str();
}

std::vector<double> TpsSurrogate::diagnostics() const { return {lambda_, df_}; }

std::shared_ptr<Surrogate> surrogate_from_coefficients(SurrogateKind kind, const std::vector<double>& c) {
    auto need = [&](std::size_t len) {
        if (c.size() < len) throw FormatError("truncated surrogate coefficient array");
    };
    if (kind == SurrogateKind::Warped) {
        need(3);
        const int d = static_cast<int>(c[0]);
        const int n_log = static_cast<int>(c[1]);
        if (d < 1 || d > kMaxDim || n_log < 0 || n_log > d) throw FormatError("bad warped surrogate header");
        need(static_cast<std::size_t>(3 + n_log));
        std::vector<int> coords;
        for (int j = 0; j < n_log; ++j) coords.push_back(static_cast<int>(c[2 + j]));
        const auto inner_kind = static_cast<SurrogateKind>(static_cast<std::uint32_t>(c[2 + n_log]));
        if (inner_kind != SurrogateKind::Gp && inner_kind != SurrogateKind::Tps) throw FormatError("bad inner surrogate kind");
        std::vector<double> rest(c.begin() + 3 + n_log, c.end());
        auto inner = surrogate_from_coefficients(inner_kind, rest);
        if (inner->dim() != d) throw FormatError("warped surrogate dimension mismatch");
        return std::make_shared<WarpedSurrogate>(std::move(inner), std::move(coords));
    }
    need(3);
    const int d = static_cast<int>(c[0]);
    const auto n = static_cast<Eigen::Index>(c[2]);
    if (d < 1 || d > kMaxDim || n < 1) throw FormatError("bad surrogate header");
    std::size_t p = 3;
    auto take = [&]() { return c[p++]; };
    if (kind == SurrogateKind::Gp) {
        need(7 + d + static_cast<std::size_t>(n) * (d + 1));
        const auto kernel = static_cast<KernelKind>(static_cast<std::uint32_t>(c[1]));
        const double beta0 = take(), nugget = take();
        GpHyper h;
        h.process_var = take();
        h.noise_var = take();
        h.lengthscale.resize(d);
        for (int j = 0; j < d; ++j) h.lengthscale(j) = take();
        Eigen::MatrixXd x(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) x(i, j) = take();
        Eigen::VectorXd alpha(n);
        for (Eigen::Index i = 0; i < n; ++i) alpha(i) = take();
        return std::make_shared<GpSurrogate>(GpSurrogate::from_parts(std::move(x), std::move(alpha), h, kernel, beta0, nugget));
    }
    if (kind == SurrogateKind::Tps) {
        need(5 + 3 * d + 1 + static_cast<std::size_t>(n) * (d + 1));
        const auto kernel = static_cast<TpsKernel>(static_cast<std::uint32_t>(c[1]));
        const double lambda = take(), df = take();
        State offset(d), scale(d);
        for (int j = 0; j < d; ++j) offset(j) = take();
        for (int j = 0; j < d; ++j) scale(j) = take();
        Eigen::VectorXd beta(d + 1);
        for (int j = 0; j <= d; ++j) beta(j) = take();
        Eigen::MatrixXd knots(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) knots(i, j) = take();
        Eigen::VectorXd alpha(n);
        for (Eigen::Index i = 0; i < n; ++i) alpha(i) = take();
        return std::make_shared<TpsSurrogate>(
            TpsSurrogate::from_parts(std::move(knots), std::move(alpha), std::move(beta), offset, scale, lambda, df, kernel));
    }
    throw FormatError("unknown surrogate kind");
}

} // namespace irmc
