#pragma once

#include "nmd/matcore.hpp"
#include "nmd/obsop.hpp"
#include "nmd/reg.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace nmd {

/// Noise families for which regularization rules exist.
struct NoNoise {};
/// i.i.d. N(0, nu^2 / (d1 d2)) entries.
struct GaussianNoise {
    double nu = 1.0;
};
/// Recentered Wishart noise (1/n) sum Z_i Z_i^T - Sigma, Z_i ~ N(0, Sigma).
struct WishartNoise {
    Matrix sigma;
    long n = 1;
};
using NoiseModel = std::variant<NoNoise, GaussianNoise, WishartNoise>;

void validate(const NoiseModel& noise);

/// Error bound terms with every universal constant set to 1. The bound is a
/// trend diagnostic, not an absolute guarantee.
struct BoundReport {
    double k_theta = 0.0;
    double k_gamma = 0.0;
    double k_tau = 0.0;
    double total = 0.0;
    bool valid = true;
    /// Failing curvature/tolerance inequality when !valid.
    std::string violation;
    static constexpr std::string_view constants_note = "constants = 1";
};

// Regularization rules. Each returns (lambda, mu, alpha).

/// Identity operator, l1 regularizer, Gaussian noise.
PenaltyParams params_sparse_gaussian(double nu, long d1, long d2, double alpha);

/// As above with the log(d1 d2 / s) refinement of mu; 1 <= s <= d1 d2.
PenaltyParams params_sparse_refined(double nu, long d1, long d2, long s,
                                    double alpha);

/// Identity operator, (2,1) regularizer, Gaussian noise. With paper_literal
/// the sqrt(log d2 / (d1 d2)) term of mu carries no nu factor; otherwise it is
/// 4 nu sqrt(log d2 / (d1 d2)).
PenaltyParams params_col_gaussian(double nu, long d1, long d2, double alpha,
                                  bool paper_literal = false);

/// Factor analysis with an n-sample (empirical or population) covariance.
/// Throws on non-symmetric or non-PSD input. `warning` receives a message
/// when n < d.
PenaltyParams params_factor(const Matrix& sigma_hat, long n, long d,
                            double alpha, std::string* warning = nullptr);

/// Multitask regression, W with i.i.d. N(0, nu^2) entries.
PenaltyParams params_multitask(double nu, const DesignStats& stats, long n,
                               long d1, long d2, double alpha);

/// Robust covariance with (2,1) regularization.
PenaltyParams params_robust_cov(double theta_opnorm, long r, long n, long d,
                                double alpha, std::string* warning = nullptr);

/// Deterministic bound for any optimum of the convex program.
///
/// k_theta = (lambda^2 / gamma^2) (r + (gamma / lambda) tail_singulars)
/// k_gamma = (mu^2 / gamma^2) (psi^2 + (gamma / mu) tail_reg)
/// k_tau   = (tau / gamma) (tail_singulars + (mu / lambda) tail_reg)^2
///
/// `tail_singulars` is the sum of the singular values of theta* past r and
/// `tail_reg` is R of gamma* off the model subspace. The tolerance conditions
/// 128 tau r < gamma / 4 and 64 tau (psi mu / lambda)^2 < gamma / 4 are
/// checked and reported through `valid`.
BoundReport theorem1_bound(const PenaltyParams& params, double gamma_curv,
                           double tau, long r, double tail_singulars, double psi,
                           double tail_reg);

enum class RateKind { sparse_gaussian, col_gaussian, factor, multitask, robust_cov };

std::string_view to_string(RateKind kind);

/// Scalars entering the displayed rates. Unused fields are ignored.
struct RateInputs {
    long d1 = 0;
    long d2 = 0;
    long r = 0;
    long s = 0;
    double alpha = 0.0;
    double nu = 0.0;
    long n = 1;
    /// factor: ||Sigma||_op and max_j Sigma_jj.
    double sigma_op = 0.0;
    double rho = 0.0;
    /// multitask design statistics.
    DesignStats stats;
    /// robust covariance: ||theta*||_op.
    double theta_opnorm = 0.0;
};

/// Error rate of the matching regularization rule, constants set to 1.
double corollary_rate(RateKind which, const RateInputs& in);

}  // namespace nmd
