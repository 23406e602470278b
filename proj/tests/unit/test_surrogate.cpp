#include "irmc/errors.hpp"
#include "irmc/rng.hpp"
#include "irmc/surrogate.hpp"

#include <doctest.h>

#include <cmath>

using namespace irmc;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
    Eigen::MatrixXd m(v.size(), 1);
    int i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

double fd_rel_error(const Surrogate& s, const State& x, const std::vector<double>& range) {
    const State g = s.gradient(x);
    double worst = 0.0;
    for (int j = 0; j < x.size(); ++j) {
        const double h = 1e-4 * range[j];
        State a = x, b = x;
        a(j) += h;
        b(j) -= h;
        const double fd = (s.predict(a) - s.predict(b)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g(j)) / std::max(std::abs(fd), 1e-3 * (1.0 + std::abs(s.predict(x)))));
    }
    return worst;
}

GpHyper hyper1(double l, double pv, double nv) {
    GpHyper h;
    h.lengthscale = make_state(l);
    h.process_var = pv;
    h.noise_var = nv;
    return h;
}

} // namespace

TEST_SUITE("surrogate") {

TEST_CASE("gp hand-computed three point posterior mean") {
    const Eigen::MatrixXd x = column({0.0, 1.0, 2.0});
    Eigen::VectorXd y(3);
    y << 0.0, 1.0, 0.0;
    const GpSurrogate gp(x, y, hyper1(1.0, 1.0, 0.1), KernelKind::SquaredExponential);

    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = std::exp(-0.5 * (i - j) * (i - j));
    a.diagonal().array() += 0.1 + gp.nugget();
    const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
    const Eigen::Vector3d yy(0.0, 1.0, 0.0);
    const double beta0 = ones.dot(a.inverse() * yy) / ones.dot(a.inverse() * ones);
    const Eigen::Vector3d c(std::exp(-0.5), 1.0, std::exp(-0.5));
    const double expected = beta0 + c.dot(a.inverse() * (yy - beta0 * ones));
    CHECK(gp.predict(make_state(1.0)) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(gp.mean_const() == doctest::Approx(beta0).epsilon(1e-10));
}

TEST_CASE("gp interpolates without noise and reverts to the mean far away") {
    const Eigen::MatrixXd x = column({0.0, 0.7, 1.3, 2.0, 3.1});
    Eigen::VectorXd y(5);
    y << 1.0, -0.5, 0.3, 2.0, 0.0;
    const GpSurrogate gp(x, y, hyper1(0.8, 2.0, 0.0), KernelKind::SquaredExponential);
    for (int i = 0; i < 5; ++i) CHECK(gp.predict(make_state(x(i, 0))) == doctest::Approx(y(i)).epsilon(1e-6).scale(1.0));
    CHECK(std::abs(gp.predict(make_state(100.0)) - gp.mean_const()) < 1e-6 * std::sqrt(2.0));
}

TEST_CASE("gp fit on constant data is flat") {
    Stream s(3);
    Eigen::MatrixXd x(12, 1);
    for (int i = 0; i < 12; ++i) x(i, 0) = s.uniform() * 4.0;
    const GpSurrogate gp = fit_gp(x, Eigen::VectorXd::Constant(12, 3.0));
    for (double t : {-1.0, 0.5, 2.0, 7.0}) CHECK(gp.predict(make_state(t)) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("gp recovers a linear slope") {
    Eigen::MatrixXd x(30, 1);
    Eigen::VectorXd y(30);
    Stream s(8);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = 4.0 * i / 29.0;
        y(i) = 2.0 * x(i, 0) + 1e-4 * s.normal();
    }
    const GpSurrogate gp = fit_gp(x, y);
    for (double t : {0.5, 1.0, 2.0, 3.0, 3.5}) CHECK(gp.gradient(make_state(t))(0) == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("gp lengthscale is recovered from prior draws") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Stream s(derive_seed(77, {seed}));
        const int n = 40;
        Eigen::MatrixXd x(n, 1);
        for (int i = 0; i < n; ++i) x(i, 0) = 4.0 * (i + 0.5) / n;
        Eigen::MatrixXd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) k(i, j) = std::exp(-0.5 * std::pow((x(i, 0) - x(j, 0)) / 0.5, 2));
        k.diagonal().array() += 1e-8;
        const Eigen::MatrixXd l = k.llt().matrixL();
        Eigen::VectorXd e(n);
        for (int i = 0; i < n; ++i) e(i) = s.normal();
        const Eigen::VectorXd y = l * e;
        GpFitOptions opt;
        opt.seed = seed;
        const GpSurrogate gp = fit_gp(x, y, opt);
        const double lhat = gp.hyper().lengthscale(0);
        ok += lhat >= 0.25 && lhat <= 1.0;
    }
    CHECK(ok == 10);
}

TEST_CASE("gp is invariant to row order and exact duplicates") {
    Stream s(12);
    const int n = 25;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = s.uniform();
        x(i, 1) = s.uniform();
        y(i) = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 1);
    }
    GpHyper h;
    h.lengthscale = make_state(0.4, 0.6);
    h.process_var = 1.0;
    h.noise_var = 1e-4;
    const GpSurrogate a(x, y, h, KernelKind::SquaredExponential);
    Eigen::MatrixXd xr = x.colwise().reverse();
    Eigen::VectorXd yr = y.reverse();
    const GpSurrogate b(xr, yr, h, KernelKind::SquaredExponential);
    for (int t = 0; t < 20; ++t) {
        const State p = make_state(s.uniform(), s.uniform());
        CHECK(std::abs(a.predict(p) - b.predict(p)) < 1e-10);
    }

    const GpSurrogate fitted = fit_gp(x, y);
    Eigen::MatrixXd xd(n + 1, 2);
    Eigen::VectorXd yd(n + 1);
    xd << x, x.row(4);
    yd << y, y(4);
    GpFitOptions opt;
    opt.initial = fitted.hyper();
    opt.restarts = 0;
    const GpSurrogate dup = fit_gp(xd, yd, opt);
    GpFitOptions same;
    same.initial = fitted.hyper();
    same.restarts = 0;
    const GpSurrogate ref = fit_gp(x, y, same);
    for (int t = 0; t < 20; ++t) {
        const State p = make_state(s.uniform(), s.uniform());
        CHECK(dup.predict(p) == doctest::Approx(ref.predict(p)).epsilon(1e-6));
    }
    yd(n) += 1.0;
    CHECK_THROWS_AS(fit_gp(xd, yd), DegenerateDesign);
}

TEST_CASE("analytic gradients match central differences") {
    Stream s(21);
    for (int dim : {1, 2}) {
        const int n = 40;
        Eigen::MatrixXd x(n, dim);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) x(i, j) = 2.0 * s.uniform();
            y(i) = std::sin(2 * x(i, 0)) + (dim == 2 ? std::cos(x(i, 1)) : 0.0) + 0.05 * s.normal();
        }
        const std::vector<double> range(dim, 2.0);
        const GpSurrogate gp = fit_gp(x, y);
        GpFitOptions m;
        m.kernel = KernelKind::Matern52;
        const GpSurrogate gm = fit_gp(x, y, m);
        const TpsSurrogate tp = fit_tps(x, y);
        const TpsSurrogate tc = fit_tps(x, y, LambdaMode::gcv(), TpsKernel::Cubic);
        for (int t = 0; t < 50; ++t) {
            State p(dim);
            for (int j = 0; j < dim; ++j) p(j) = 0.1 + 1.8 * s.uniform();
            CHECK(fd_rel_error(gp, p, range) < 1e-4);
            CHECK(fd_rel_error(gm, p, range) < 1e-4);
            CHECK(fd_rel_error(tp, p, range) < 1e-4);
            CHECK(fd_rel_error(tc, p, range) < 1e-4);
        }
    }
}

TEST_CASE("tps kernel derivative vanishes at the origin") {
    CHECK(tps_phi(0.0) == 0.0);
    CHECK(tps_phi_derivative_1d(0.0) == 0.0);
    CHECK(std::abs(tps_phi_derivative_1d(1e-12)) < 1e-9);
    CHECK(tps_phi_derivative_1d(2.0) == doctest::Approx(2.0 * (2.0 * std::log(2.0) + 1.0)));
}

TEST_CASE("tps interpolates at lambda zero") {
    const int n = 15;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 0.3 * i + 0.05 * (i % 3);
        y(i) = std::exp(-x(i, 0)) * std::cos(x(i, 0));
    }
    for (auto kernel : {TpsKernel::ThinPlate, TpsKernel::Cubic}) {
        const TpsSurrogate t = fit_tps(x, y, LambdaMode::fixed(0.0), kernel);
        for (int i = 0; i < n; ++i) CHECK(std::abs(t.predict(make_state(x(i, 0))) - y(i)) < 1e-8);
    }
}

TEST_CASE("tps with huge lambda is the least-squares line") {
    const Eigen::MatrixXd x3 = column({0.0, 1.0, 2.0, 2.5, 4.0});
    Eigen::VectorXd y3(5);
    y3 << 0.0, 2.0, 4.0, 5.0, 8.0;
    const TpsSurrogate line = fit_tps(x3, y3, LambdaMode::fixed(1e12));
    for (double t : {-1.0, 0.5, 1.7, 3.0}) CHECK(line.predict(make_state(t)) == doctest::Approx(2.0 * t).epsilon(1e-9).scale(1.0));

    Stream s(4);
    const int n = 30;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = s.uniform();
        x(i, 1) = s.uniform();
        y(i) = x(i, 0) * x(i, 0) - x(i, 1) + 0.3 * std::sin(7.0 * x(i, 1));
    }
    Eigen::MatrixXd design(n, 3);
    design << Eigen::VectorXd::Ones(n), x;
    const Eigen::VectorXd b = design.colPivHouseholderQr().solve(y);
    const TpsSurrogate t = fit_tps(x, y, LambdaMode::fixed(1e12));
    for (int i = 0; i < 10; ++i) {
        const State p = make_state(s.uniform(), s.uniform());
        CHECK(std::abs(t.predict(p) - (b(0) + b(1) * p(0) + b(2) * p(1))) < 1e-6);
    }
    CHECK(t.alpha().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("tps side conditions") {
    Stream s(9);
    for (int dim : {1, 2}) {
        const int n = 50;
        Eigen::MatrixXd x(n, dim);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) x(i, j) = 10.0 * s.uniform();
            y(i) = std::sin(x(i, 0)) + s.normal();
        }
        for (auto mode : {LambdaMode::gcv(), LambdaMode::fixed(0.0), LambdaMode::fixed(1e-3)}) {
            const TpsSurrogate t = fit_tps(x, y, mode);
            const double scale = t.alpha().cwiseAbs().sum();
            CHECK(std::abs(t.alpha().sum()) < 1e-10 * (1.0 + scale));
            const Eigen::VectorXd ax = t.knots().transpose() * t.alpha();
            CHECK(ax.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + scale));
        }
    }
}

TEST_CASE("gcv beats both interpolation and the straight line") {
    Stream s(31);
    const int n = 200;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 2.0 * M_PI * s.uniform();
        y(i) = std::sin(x(i, 0)) + 0.1 * s.normal();
    }
    auto mse = [](const TpsSurrogate& t) {
        double e = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double u = 0.2 + (2.0 * M_PI - 0.4) * i / 100.0;
            e += std::pow(t.predict(make_state(u)) - std::sin(u), 2);
        }
        return e / 101.0;
    };
    const double gcv = mse(fit_tps(x, y, LambdaMode::gcv()));
    CHECK(gcv < mse(fit_tps(x, y, LambdaMode::fixed(0.0))));
    CHECK(gcv < mse(fit_tps(x, y, LambdaMode::fixed(1e12))));
}

TEST_CASE("tps rejects collinear and tiny designs") {
    Eigen::MatrixXd line(6, 2);
    for (int i = 0; i < 6; ++i) line.row(i) << i, 2.0 * i;
    CHECK_THROWS_AS(fit_tps(line, Eigen::VectorXd::Ones(6)), SingularSystem);
    CHECK_THROWS_AS(fit_tps(column({0.0, 1.0}), Eigen::VectorXd::Ones(2)), TooFewSites);
}

TEST_CASE("coefficients round-trip exactly") {
    Stream s(5);
    const int n = 20;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0 + s.uniform();
        x(i, 1) = 1.0 + 50.0 * s.uniform();
        y(i) = x(i, 0) * std::sqrt(x(i, 1));
    }
    const auto gp = std::make_shared<GpSurrogate>(fit_gp(x, y));
    const auto tp = std::make_shared<TpsSurrogate>(fit_tps(x, y));
    const auto wp = std::make_shared<WarpedSurrogate>(
        std::make_shared<GpSurrogate>(fit_gp(WarpedSurrogate::warp(x, {0, 1}), y)), std::vector<int>{0, 1});
    for (const SurrogatePtr& sp : std::vector<SurrogatePtr>{gp, tp, wp}) {
        const auto back = surrogate_from_coefficients(sp->kind(), sp->coefficients());
        CHECK(back->coefficients() == sp->coefficients());
        for (int t = 0; t < 100; ++t) {
            const State p = make_state(1.0 + s.uniform(), 1.0 + 50.0 * s.uniform());
            CHECK(std::abs(back->predict(p) - sp->predict(p)) <= 1e-12 * (1.0 + std::abs(sp->predict(p))));
        }
    }
    CHECK_THROWS(surrogate_from_coefficients(SurrogateKind::Gp, {1.0, 2.0}));
}

TEST_CASE("log-warped surrogate") {
    const Eigen::MatrixXd x = column({1.0, 2.0, 4.0, 8.0, 16.0, 32.0});
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) y(i) = std::log(x(i, 0));
    const auto inner = std::make_shared<TpsSurrogate>(fit_tps(WarpedSurrogate::warp(x, {0}), y, LambdaMode::fixed(1e10)));
    const WarpedSurrogate w(inner, {0});
    CHECK(w.predict(make_state(10.0)) == doctest::Approx(std::log(10.0)).epsilon(1e-6));
    CHECK(w.gradient(make_state(10.0))(0) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(fd_rel_error(w, make_state(5.0), {31.0}) < 1e-4);
    CHECK_THROWS_AS(w.predict(make_state(-1.0)), NonFiniteState);
}

}
