#include "nmd/tuning.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nmd {

namespace {

double dbl(long v) { return static_cast<double>(v); }

void require_positive(long v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) +
                                    " must be finite and nonnegative");
}

// Throws unless m is symmetric positive semidefinite (to a relative 1e-10).
// Returns the largest eigenvalue.
double require_psd(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw std::invalid_argument(std::string(what) + " must be square");
    require_finite(m, what);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument(std::string(what) + " is not symmetric");
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()),
                                              Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(1.0, std::abs(hi)))
        throw std::invalid_argument(std::string(what) +
                                    " is not positive semidefinite");
    return std::max(hi, 0.0);
}

}  // namespace

void validate(const NoiseModel& noise) {
    if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
        if (!(g->nu > 0.0)) throw std::invalid_argument("noise nu must be positive");
    } else if (const auto* w = std::get_if<WishartNoise>(&noise)) {
        require_psd(w->sigma, "Wishart covariance");
        require_positive(w->n, "Wishart sample count");
    }
}

PenaltyParams params_sparse_gaussian(double nu, long d1, long d2, double alpha) {
    require_nonnegative(nu, "nu");
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    const double dd = dbl(d1) * dbl(d2);
    PenaltyParams p;
    p.lambda = 8.0 * nu / std::sqrt(dbl(d1)) + 8.0 * nu / std::sqrt(dbl(d2));
    p.mu = 16.0 * nu * std::sqrt(std::log(dd) / dd) + 4.0 * alpha / std::sqrt(dd);
    p.alpha = alpha;
    return p;
}

PenaltyParams params_sparse_refined(double nu, long d1, long d2, long s,
                                    double alpha) {
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    const double dd = dbl(d1) * dbl(d2);
    if (s < 1 || dbl(s) > dd)
        throw std::out_of_range("params_sparse_refined: s must lie in [1, d1 d2]");
    PenaltyParams p = params_sparse_gaussian(nu, d1, d2, alpha);
    p.mu = 16.0 * nu * std::sqrt(std::log(dd / dbl(s)) / dd) + 4.0 * alpha / std::sqrt(dd);
    return p;
}

PenaltyParams params_col_gaussian(double nu, long d1, long d2, double alpha,
                                  bool paper_literal) {
    require_nonnegative(nu, "nu");
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    const double dd = dbl(d1) * dbl(d2);
    const double log_term = std::sqrt(std::log(dbl(d2)) / dd);
    PenaltyParams p;
    p.lambda = 8.0 * nu / std::sqrt(dbl(d1)) + 8.0 * nu / std::sqrt(dbl(d2));
    p.mu = 8.0 * nu * std::sqrt(1.0 / dbl(d2)) +
           (paper_literal ? log_term : 4.0 * nu * log_term) +
           4.0 * alpha / std::sqrt(dbl(d2));
    p.alpha = alpha;
    return p;
}

PenaltyParams params_factor(const Matrix& sigma_hat, long n, long d,
                            double alpha, std::string* warning) {
    require_positive(n, "n");
    require_positive(d, "d");
    require_shape(sigma_hat, d, d, "covariance");
    const double top = require_psd(sigma_hat, "covariance");
    if (n < d && warning)
        *warning = "factor analysis rule assumes n >= d samples (n = " +
                   std::to_string(n) + ", d = " + std::to_string(d) + ")";
    const double rho = sigma_hat.diagonal().maxCoeff();
    PenaltyParams p;
    p.lambda = 16.0 * std::sqrt(top) * std::sqrt(dbl(d) / dbl(n));
    p.mu = 32.0 * rho * std::sqrt(std::log(dbl(d)) / dbl(n)) + 4.0 * alpha / dbl(d);
    p.alpha = alpha;
    return p;
}

PenaltyParams params_multitask(double nu, const DesignStats& stats, long n,
                               long d1, long d2, double alpha) {
    require_nonnegative(nu, "nu");
    require_positive(n, "n");
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    const double dd = dbl(d1) * dbl(d2);
    const double root_n = std::sqrt(dbl(n));
    PenaltyParams p;
    p.lambda = 8.0 * nu * stats.sigma_max * root_n *
               (std::sqrt(dbl(d1)) + std::sqrt(dbl(d2)));
    p.mu = 16.0 * nu * stats.kappa_max * std::sqrt(dbl(n) * std::log(dd)) +
           4.0 * alpha * stats.sigma_min * root_n / std::sqrt(dd);
    p.alpha = alpha;
    return p;
}

PenaltyParams params_robust_cov(double theta_opnorm, long r, long n, long d,
                                double alpha, std::string* warning) {
    require_nonnegative(theta_opnorm, "theta_opnorm");
    if (r < 0) throw std::invalid_argument("r must be nonnegative");
    require_positive(n, "n");
    require_positive(d, "d");
    if (n < d && warning)
        *warning = "robust covariance rule assumes n >= d samples";
    const double base = 8.0 * theta_opnorm * theta_opnorm * dbl(r) / dbl(n);
    PenaltyParams p;
    p.lambda = std::sqrt(base);
    p.mu = std::sqrt(base + 16.0 * alpha * alpha / dbl(d));
    p.alpha = alpha;
    return p;
}

BoundReport theorem1_bound(const PenaltyParams& params, double gamma_curv,
                           double tau, long r, double tail_singulars, double psi,
                           double tail_reg) {
    if (!(gamma_curv > 0.0))
        throw std::invalid_argument("curvature gamma must be positive");
    require_nonnegative(tau, "tau");
    require_nonnegative(tail_singulars, "tail_singulars");
    require_nonnegative(psi, "psi");
    require_nonnegative(tail_reg, "tail_reg");
    if (r < 0) throw std::invalid_argument("r must be nonnegative");

    const double lam = params.lambda;
    const double mu = params.mu;
    const double g = gamma_curv;
    BoundReport rep;
    rep.k_theta = lam * lam / (g * g) * dbl(r) + lam / g * tail_singulars;
    rep.k_gamma = mu * mu / (g * g) * psi * psi + mu / g * tail_reg;
    if (tau > 0.0) {
        const double ratio =
            mu * tail_reg == 0.0 ? 0.0
                                 : (lam > 0.0 ? mu / lam * tail_reg
                                              : std::numeric_limits<double>::infinity());
        const double excess = tail_singulars + ratio;
        rep.k_tau = tau / g * excess * excess;
    }
    rep.total = rep.k_theta + rep.k_gamma + rep.k_tau;

    std::ostringstream why;
    if (!(128.0 * tau * dbl(r) < g / 4.0)) {
        rep.valid = false;
        why << "128 tau r = " << 128.0 * tau * dbl(r) << " >= gamma/4 = " << g / 4.0;
    }
    const double coupling = psi * mu == 0.0
                                ? 0.0
                                : (lam > 0.0 ? psi * mu / lam
                                             : std::numeric_limits<double>::infinity());
    if (!(64.0 * tau * coupling * coupling < g / 4.0)) {
        rep.valid = false;
        if (why.tellp() > 0) why << "; ";
        why << "64 tau (psi mu / lambda)^2 = " << 64.0 * tau * coupling * coupling
            << " >= gamma/4 = " << g / 4.0;
    }
    rep.violation = why.str();
    return rep;
}

std::string_view to_string(RateKind kind) {
    switch (kind) {
        case RateKind::sparse_gaussian: return "sparse_gaussian";
        case RateKind::col_gaussian: return "col_gaussian";
        case RateKind::factor: return "factor";
        case RateKind::multitask: return "multitask";
        case RateKind::robust_cov: return "robust_cov";
    }
    return "unknown";
}

double corollary_rate(RateKind which, const RateInputs& in) {
    const double d1 = dbl(in.d1);
    const double d2 = dbl(in.d2);
    const double r = dbl(in.r);
    const double s = dbl(in.s);
    const double a2 = in.alpha * in.alpha;
    const double nu2 = in.nu * in.nu;
    switch (which) {
        case RateKind::sparse_gaussian: {
            const double dd = d1 * d2;
            return nu2 * r * (d1 + d2) / dd + nu2 * s * std::log(dd) / dd + a2 * s / dd;
        }
        case RateKind::col_gaussian: {
            const double dd = d1 * d2;
            return nu2 * r * (d1 + d2) / dd +
                   nu2 * (s * d1 / dd + s * std::log(d2) / dd) + a2 * s / d2;
        }
        case RateKind::factor: {
            const double d = d1;
            const double n = dbl(in.n);
            return in.sigma_op * r * d / n + in.rho * s * std::log(d) / n +
                   a2 * s / (d * d);
        }
        case RateKind::multitask: {
            const double dd = d1 * d2;
            const double n = dbl(in.n);
            const double smin4 = std::pow(in.stats.sigma_min, 4);
            return nu2 * in.stats.sigma_max * in.stats.sigma_max / smin4 * r *
                       (d1 + d2) / n +
                   nu2 * in.stats.kappa_max * in.stats.kappa_max / smin4 * s *
                       std::log(dd) / n +
                   a2 * s / dd;
        }
        case RateKind::robust_cov: {
            const double n = dbl(in.n);
            const double op2 = in.theta_opnorm * in.theta_opnorm;
            return op2 * (r * r / n + s * r / n) + a2 * s / d1;
        }
    }
    throw std::invalid_argument("unknown rate kind");
}

}  // namespace nmd
