#include "irmc/design.hpp"

#include "irmc/errors.hpp"
#include "irmc/rng.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace irmc {

namespace {

void check_domain(const Box& domain) {
    if (domain.dim() < 1 || domain.hi.size() != domain.lo.size()) throw DomainDegenerate("empty domain");
    for (int i = 0; i < domain.dim(); ++i) {
        if (!std::isfinite(domain.lo[i]) || !std::isfinite(domain.hi[i]) || !(domain.lo[i] < domain.hi[i])) {
            throw DomainDegenerate("domain coordinate " + std::to_string(i) + " has lo >= hi");
        }
    }
}

Eigen::MatrixXd to_domain(const Eigen::MatrixXd& unit, const Box& domain) {
    Eigen::MatrixXd out(unit.rows(), unit.cols());
    for (int j = 0; j < unit.cols(); ++j) {
        out.col(j) = (domain.lo[j] + domain.range(j) * unit.col(j).array()).matrix();
    }
    return out;
}

Eigen::MatrixXd sobol_unit(int dim, int n, std::uint64_t seed, bool scramble) {
    boost::random::sobol engine(dim);
    // Skip the origin, which sits on the domain corner.
    engine.discard(dim);
    std::vector<std::uint64_t> shift(dim, 0);
    if (scramble) {
        Xoshiro256pp rng(derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::Design), 17}));
        for (auto& s : shift) s = rng();
    }
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) {
            const std::uint64_t v = static_cast<std::uint64_t>(engine()) ^ shift[j];
            // Center within the finest cell so points never hit the boundary exactly.
            pts(i, j) = (static_cast<double>(v >> 11) + 0.5) * std::ldexp(1.0, -53);
        }
    }
    return pts;
}

} // namespace

Box DesignSpec::domain_at(double t) const {
    Box box = domain;
    for (const auto& s : spreads) {
        const double w = s.base_log_width + s.n_sd * s.vol * std::sqrt(std::max(t, 0.0));
        box.lo[s.coord] = s.center * std::exp(-w);
        box.hi[s.coord] = s.center * std::exp(w);
    }
    return box;
}

TrainingDesign build_design(DesignScheme scheme, const Box& domain, int n_unique, int n_rep, std::uint64_t seed,
                            const Eigen::MatrixXd& explicit_sites, bool scramble) {
    check_domain(domain);
    if (n_rep < 1) throw TooFewSites("n_rep must be at least 1");
    const int dim = domain.dim();
    TrainingDesign d;
    d.scheme = scheme;
    d.domain = domain;
    d.n_rep = n_rep;
    switch (scheme) {
        case DesignScheme::ExplicitLattice: {
            if (explicit_sites.rows() < 2) throw TooFewSites("explicit lattice needs at least 2 sites");
            if (explicit_sites.cols() != dim) throw DomainDegenerate("explicit sites have the wrong dimension");
            std::set<std::vector<double>> seen;
            for (int i = 0; i < explicit_sites.rows(); ++i) {
                State x = explicit_sites.row(i).transpose();
                if (!domain.contains(x)) throw DomainDegenerate("explicit site outside the domain");
                std::vector<double> key(x.data(), x.data() + dim);
                if (!seen.insert(key).second) throw DomainDegenerate("explicit sites must be distinct");
            }
            d.unique_sites = explicit_sites;
            return d;
        }
        case DesignScheme::IidUniform: {
            if (n_unique < 2) throw TooFewSites("need at least 2 sites");
            Xoshiro256pp rng(derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::Design), 1}));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Eigen::MatrixXd unit(n_unique, dim);
            for (int i = 0; i < n_unique; ++i)
                for (int j = 0; j < dim; ++j) unit(i, j) = u(rng);
            d.unique_sites = to_domain(unit, domain);
            return d;
        }
        case DesignScheme::LatinHypercube: {
            if (n_unique < 2) throw TooFewSites("need at least 2 sites");
            Xoshiro256pp rng(derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::Design), 2}));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Eigen::MatrixXd unit(n_unique, dim);
            std::vector<int> perm(n_unique);
            for (int j = 0; j < dim; ++j) {
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                for (int i = 0; i < n_unique; ++i) unit(i, j) = (perm[i] + u(rng)) / n_unique;
            }
            d.unique_sites = to_domain(unit, domain);
            return d;
        }
        case DesignScheme::Sobol: {
            if (n_unique < 2) throw TooFewSites("need at least 2 sites");
            d.unique_sites = to_domain(sobol_unit(dim, n_unique, seed, scramble), domain);
            return d;
        }
    }
    throw DomainDegenerate("unknown design scheme");
}

TrainingDesign build_design_for_step(const DesignSpec& spec, int k, double t, std::uint64_t seed) {
    const Box box = spec.domain_at(t);
    // Sobol stays the same point set every step unless scrambled differently per step.
    const std::uint64_t step_seed = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    if (spec.log_coords.empty() || spec.scheme == DesignScheme::ExplicitLattice) {
        return build_design(spec.scheme, box, spec.n_unique, spec.n_rep, step_seed, spec.explicit_sites, spec.scramble);
    }
    Box log_box = box;
    for (int j : spec.log_coords) {
        if (j < 0 || j >= box.dim()) throw DomainDegenerate("log coordinate out of range");
        if (!(box.lo[j] > 0.0)) throw DomainDegenerate("log-uniform coordinate needs a positive lower bound");
        log_box.lo[j] = std::log(box.lo[j]);
        log_box.hi[j] = std::log(box.hi[j]);
    }
    TrainingDesign d = build_design(spec.scheme, log_box, spec.n_unique, spec.n_rep, step_seed, spec.explicit_sites, spec.scramble);
    for (int j : spec.log_coords) {
        d.unique_sites.col(j) = d.unique_sites.col(j).array().exp().max(box.lo[j]).min(box.hi[j]).matrix();
    }
    d.domain = box;
    return d;
}

PreAveraged pre_average(const Eigen::MatrixXd& responses) {
    PreAveraged out;
    const auto n_rep = responses.cols();
    out.means = responses.rowwise().mean();
    if (n_rep <= 1) {
        out.emp_var = Eigen::VectorXd::Zero(responses.rows());
        return out;
    }
    const Eigen::MatrixXd centered = responses.colwise() - out.means;
    out.emp_var = centered.rowwise().squaredNorm() / static_cast<double>(n_rep - 1);
    return out;
}

Eigen::VectorXd linspace(double a, double b, int n) {
    Eigen::VectorXd v(n);
    if (n == 1) {
        v(0) = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v(i) = a + (b - a) * i / (n - 1);
    return v;
}

Eigen::MatrixXd federico_lattice() {
    Eigen::MatrixXd sites(600, 1);
    sites.topRows(350).col(0) = linspace(1.0, 18.0, 350);
    sites.bottomRows(250).col(0) = linspace(18.2, 90.0, 250);
    return sites;
}

double star_discrepancy(const Eigen::MatrixXd& pts) {
    const int n = static_cast<int>(pts.rows());
    const int dim = static_cast<int>(pts.cols());
    if (dim == 1) {
        std::vector<double> x(pts.data(), pts.data() + n);
        std::sort(x.begin(), x.end());
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            worst = std::max(worst, std::max((i + 1.0) / n - x[i], x[i] - static_cast<double>(i) / n));
        }
        return worst;
    }
    if (dim != 2) throw UnsupportedDimension("star discrepancy is implemented for d <= 2");
    // Critical boxes have corners at point coordinates (or 1); check open and closed counts.
    std::vector<double> xs(n + 1), ys(n + 1);
    for (int i = 0; i < n; ++i) {
        xs[i] = pts(i, 0);
        ys[i] = pts(i, 1);
    }
    xs[n] = 1.0;
    ys[n] = 1.0;
    double worst = 0.0;
    for (double u : xs) {
        for (double v : ys) {
            int closed = 0, open = 0;
            for (int i = 0; i < n; ++i) {
                if (pts(i, 0) <= u && pts(i, 1) <= v) ++closed;
                if (pts(i, 0) < u && pts(i, 1) < v) ++open;
            }
            const double vol = u * v;
            worst = std::max(worst, std::max(static_cast<double>(closed) / n - vol, vol - static_cast<double>(open) / n));
        }
    }
    return worst;
}

} // namespace irmc
