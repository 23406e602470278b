#pragma once

// Box-constrained Nelder-Mead on [0,1]^p (points are projected onto the box).

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <vector>

namespace irmc::detail {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value;
    int evals;
};

inline NelderMeadResult nelder_mead_unit_box(const std::function<double(const Eigen::VectorXd&)>& f,
                                             Eigen::VectorXd start, double step, int max_evals, double ftol = 1e-8) {
    const int p = static_cast<int>(start.size());
    auto project = [](Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0).eval(); };
    std::vector<Eigen::VectorXd> simplex(p + 1, project(start));
    std::vector<double> values(p + 1);
    for (int i = 0; i < p; ++i) {
        Eigen::VectorXd v = simplex[0];
        v(i) += (v(i) + step <= 1.0) ? step : -step;
        simplex[i + 1] = project(v);
    }
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& v) {
        ++evals;
        return f(v);
    };
    for (int i = 0; i <= p; ++i) values[i] = eval(simplex[i]);

    std::vector<int> order(p + 1);
    while (evals < max_evals) {
        for (int i = 0; i <= p; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
        const int best = order.front(), worst = order.back(), second = order[p - 1];
        if (std::abs(values[worst] - values[best]) <= ftol * (1.0 + std::abs(values[best]))) {
            double spread = 0.0;
            for (int i = 0; i <= p; ++i) spread = std::max(spread, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
            if (spread < 1e-6) break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
        for (int i = 0; i <= p; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= p;

        const Eigen::VectorXd reflected = project(centroid + (centroid - simplex[worst]));
        const double fr = eval(reflected);
        if (fr < values[best]) {
            const Eigen::VectorXd expanded = project(centroid + 2.0 * (centroid - simplex[worst]));
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Eigen::VectorXd contracted =
            outside ? project(centroid + 0.5 * (reflected - centroid)) : project(centroid + 0.5 * (simplex[worst] - centroid));
        const double fc = eval(contracted);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (int i = 0; i <= p; ++i) {
            if (i == best) continue;
            simplex[i] = project(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
            values[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {simplex[idx], *it, evals};
}

} // namespace irmc::detail
