#pragma once

#include "irmc/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace irmc {

enum class SurrogateKind : std::uint32_t { Gp = 1, Tps = 2, Warped = 3 };
enum class KernelKind : std::uint32_t { SquaredExponential = 0, Matern52 = 1 };
enum class TpsKernel : std::uint32_t { ThinPlate = 0, Cubic = 1 };

/// A fitted continuation-value approximator. Immutable after fitting, so
/// prediction may be called concurrently.
class Surrogate {
public:
    virtual ~Surrogate() = default;

    virtual SurrogateKind kind() const = 0;
    virtual int dim() const = 0;
    virtual double predict(const State& x) const = 0;
    virtual State gradient(const State& x) const = 0;

    /// Flat coefficient array; `surrogate_from_coefficients` inverts it.
    virtual std::vector<double> coefficients() const = 0;
    /// Short human-readable fit summary (hyperparameters or smoothing level).
    virtual std::string describe() const = 0;
    /// Numeric fit diagnostics: GP (lengthscales..., process_var, noise_var), TPS (lambda, df).
    virtual std::vector<double> diagnostics() const = 0;
};

using SurrogatePtr = std::shared_ptr<const Surrogate>;

std::shared_ptr<Surrogate> surrogate_from_coefficients(SurrogateKind kind, const std::vector<double>& coef);

/// f(x) = g(u(x)) where u takes logs of the listed coordinates (which must stay positive).
/// Coefficients: [dim, n_log, coords..., inner kind, inner coefficients...].
class WarpedSurrogate final : public Surrogate {
public:
    WarpedSurrogate(SurrogatePtr inner, std::vector<int> log_coords);

    static State warp(const State& x, const std::vector<int>& log_coords);
    static Eigen::MatrixXd warp(const Eigen::MatrixXd& x, const std::vector<int>& log_coords);

    SurrogateKind kind() const override { return SurrogateKind::Warped; }
    int dim() const override { return inner_->dim(); }
    double predict(const State& x) const override;
    State gradient(const State& x) const override;
    std::vector<double> coefficients() const override;
    std::string describe() const override;
    std::vector<double> diagnostics() const override { return inner_->diagnostics(); }

    const Surrogate& inner() const { return *inner_; }
    const std::vector<int>& log_coords() const { return log_coords_; }

private:
    SurrogatePtr inner_;
    std::vector<int> log_coords_;
};

// ---------------------------------------------------------------- GP

struct GpHyper {
    State lengthscale;
    double process_var = 1.0;
    double noise_var = 1e-6;
};

struct GpFitOptions {
    KernelKind kernel = KernelKind::SquaredExponential;
    int restarts = 3;
    std::uint64_t seed = 0;
    /// Starting guess for the noise variance of the responses (<= 0: none).
    double noise_hint = -1.0;
    /// Per-site multipliers of the noise variance, e.g. 1/n_rep for pre-averaged means.
    Eigen::VectorXd noise_scale;
    /// Reference coordinate ranges for lengthscale bounds; data range if empty.
    std::vector<double> coord_range;
    int max_evals = 400;
    /// Warm start (e.g. the previous step's fit); used as the first start when set.
    std::optional<GpHyper> initial;
};

/// Gaussian-process regression with constant mean, posterior mean
///   beta0 + c(x)' (C + Sigma)^{-1} (y - beta0 1),
/// where Sigma = noise_var * diag(noise_scale) plus a small nugget.
class GpSurrogate final : public Surrogate {
public:
    /// Condition on data with fixed hyperparameters. Throws CholeskyFailure.
    GpSurrogate(Eigen::MatrixXd x, Eigen::VectorXd y, GpHyper hyper, KernelKind kernel,
                Eigen::VectorXd noise_scale = {});

    /// Reassemble a fitted surrogate from stored parts (no refactorization).
    static GpSurrogate from_parts(Eigen::MatrixXd x, Eigen::VectorXd alpha, GpHyper hyper, KernelKind kernel,
                                  double beta0, double nugget);

    SurrogateKind kind() const override { return SurrogateKind::Gp; }
    int dim() const override { return static_cast<int>(x_.cols()); }
    double predict(const State& x) const override;
    State gradient(const State& x) const override;
    std::vector<double> coefficients() const override;
    std::string describe() const override;
    std::vector<double> diagnostics() const override;

    const GpHyper& hyper() const { return hyper_; }
    double mean_const() const { return beta0_; }
    double nugget() const { return nugget_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::MatrixXd& train_x() const { return x_; }
    KernelKind kernel() const { return kernel_; }
    /// Negative log marginal likelihood at the fitted hyperparameters (NaN if reassembled).
    double neg_log_likelihood() const { return nll_; }

    double kernel_value(const State& a, const State& b) const;

private:
    GpSurrogate() = default;

    Eigen::MatrixXd x_;
    Eigen::VectorXd alpha_;
    GpHyper hyper_;
    KernelKind kernel_ = KernelKind::SquaredExponential;
    double beta0_ = 0.0;
    double nugget_ = 0.0;
    double nll_ = 0.0;
    // inverse squared lengthscales, cached
    State inv_l2_;
};

/// Maximum-likelihood GP fit with multi-start bounded Nelder-Mead.
/// Exact duplicate sites with equal responses are merged; conflicting ones
/// throw DegenerateDesign.
GpSurrogate fit_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpFitOptions& options = {});

/// Negative log marginal likelihood (beta0 profiled by GLS).
double gp_neg_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyper& hyper,
                             KernelKind kernel, const Eigen::VectorXd& noise_scale);

// ---------------------------------------------------------------- TPS

struct TpsFactorization;

struct LambdaMode {
    enum class Kind { Fixed, Gcv } kind = Kind::Gcv;
    double lambda = 0.0;

    static LambdaMode fixed(double l) { return {Kind::Fixed, l}; }
    static LambdaMode gcv() { return {Kind::Gcv, 0.0}; }
};

/// Penalized thin-plate spline
///   beta0 + beta' x + sum_n alpha_n phi(|x - x_n|),  phi(r) = r^2 log r,
/// with side conditions sum alpha = 0, sum alpha x = 0. Inputs are mapped to
/// the unit box internally; `Cubic` swaps phi for r^3.
class TpsSurrogate final : public Surrogate {
public:
    static TpsSurrogate from_parts(Eigen::MatrixXd knots, Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                   State offset, State scale, double lambda, double df, TpsKernel kernel);

    SurrogateKind kind() const override { return SurrogateKind::Tps; }
    int dim() const override { return static_cast<int>(knots_.cols()); }
    double predict(const State& x) const override;
    State gradient(const State& x) const override;
    std::vector<double> coefficients() const override;
    std::string describe() const override;
    std::vector<double> diagnostics() const override;

    double lambda() const { return lambda_; }
    double effective_df() const { return df_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::VectorXd& beta() const { return beta_; }  // in unit-box coordinates
    const Eigen::MatrixXd& knots() const { return knots_; }  // unit-box coordinates
    TpsKernel kernel() const { return kernel_; }

private:
    friend TpsSurrogate fit_tps(const TpsFactorization&, const Eigen::VectorXd&, LambdaMode);
    TpsSurrogate() = default;

    Eigen::MatrixXd knots_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd beta_;
    State offset_;
    State scale_;
    double lambda_ = 0.0;
    double df_ = 0.0;
    TpsKernel kernel_ = TpsKernel::ThinPlate;
};

/// Site-dependent part of a TPS fit (scaling, QR of the null-space basis and
/// the eigendecomposition of the projected kernel). Reusable across responses
/// observed at the same sites.
struct TpsFactorization {
    Eigen::MatrixXd knots;  // unit-box coordinates
    State offset;
    State scale;
    TpsKernel kernel = TpsKernel::ThinPlate;
    Eigen::MatrixXd kmat;  // kernel matrix on the knots
    Eigen::MatrixXd q1;    // orthonormal basis of span{1, x}
    Eigen::MatrixXd r;     // upper-triangular factor of the null-space basis
    Eigen::MatrixXd q2u;   // Q2 * U, eigenvectors of Q2' K Q2 mapped back
    Eigen::VectorXd eig;   // eigenvalues of Q2' K Q2

    bool same_sites(const Eigen::MatrixXd& x, TpsKernel k) const;
};

/// Throws SingularSystem (collinear sites) or TooFewSites.
TpsFactorization factorize_tps(const Eigen::MatrixXd& x, TpsKernel kernel = TpsKernel::ThinPlate);

TpsSurrogate fit_tps(const TpsFactorization& f, const Eigen::VectorXd& y, LambdaMode mode = LambdaMode::gcv());

/// Fit with a fixed lambda or by GCV over 30 log-spaced values (then a local
/// golden-section polish). Throws SingularSystem, TooFewSites.
TpsSurrogate fit_tps(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, LambdaMode mode = LambdaMode::gcv(),
                     TpsKernel kernel = TpsKernel::ThinPlate);

/// phi(r) for the thin-plate kernel; 0 at r = 0.
double tps_phi(double r);
/// d/du of |u|^2 log|u| in 1-D: u (2 log|u| + 1); 0 at u = 0.
double tps_phi_derivative_1d(double u);

} // namespace irmc
