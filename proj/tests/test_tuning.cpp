#include "helpers.hpp"

#include "nmd/obsop.hpp"
#include "nmd/synth.hpp"
#include "nmd/tuning.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nmd;
using nmd::testing::random_matrix;

TEST(SparseGaussian, Examples) {
    EXPECT_NEAR(params_sparse_gaussian(1.0, 100, 100, 0.0).lambda, 1.6, 1e-15);
    const PenaltyParams noiseless = params_sparse_gaussian(0.0, 30, 40, 2.0);
    EXPECT_EQ(noiseless.lambda, 0.0);
    EXPECT_NEAR(noiseless.mu, 4.0 * 2.0 / std::sqrt(1200.0), 1e-15);
    const PenaltyParams p = params_sparse_gaussian(1.0, 100, 100, 1.0);
    EXPECT_NEAR(p.mu, 16.0 * std::sqrt(std::log(1e4) / 1e4) + 0.04, 1e-14);
    EXPECT_EQ(p.alpha, 1.0);
    EXPECT_THROW(params_sparse_gaussian(-1.0, 10, 10, 1.0), std::invalid_argument);
    EXPECT_THROW(params_sparse_gaussian(1.0, 0, 10, 1.0), std::invalid_argument);
}

TEST(SparseRefined, Examples) {
    const PenaltyParams base = params_sparse_gaussian(1.3, 40, 50, 2.0);
    const PenaltyParams one = params_sparse_refined(1.3, 40, 50, 1, 2.0);
    EXPECT_EQ(one.lambda, base.lambda);
    EXPECT_EQ(one.mu, base.mu);
    EXPECT_NEAR(params_sparse_refined(1.0, 40, 50, 2000, 2.0).mu, 8.0 / std::sqrt(2000.0), 1e-15);
    EXPECT_NEAR(params_sparse_refined(1.0, 100, 100, 2171, 1.0).mu,
                16.0 * std::sqrt(std::log(1e4 / 2171.0) / 1e4) + 0.04, 1e-14);
    EXPECT_THROW(params_sparse_refined(1.0, 10, 10, 0, 1.0), std::out_of_range);
    EXPECT_THROW(params_sparse_refined(1.0, 10, 10, 101, 1.0), std::out_of_range);
}

TEST(ColGaussian, Examples) {
    EXPECT_NEAR(params_col_gaussian(0.0, 30, 64, 3.0).mu, 4.0 * 3.0 / 8.0, 1e-15);
    const double log_term = std::sqrt(std::log(100.0) / 1e4);
    const PenaltyParams proof = params_col_gaussian(1.0, 100, 100, 1.0, false);
    const PenaltyParams literal = params_col_gaussian(1.0, 100, 100, 1.0, true);
    EXPECT_NEAR(proof.mu, 0.8 + 4.0 * log_term + 0.4, 1e-14);
    EXPECT_NEAR(literal.mu, 0.8 + log_term + 0.4, 1e-14);
    EXPECT_NEAR(proof.mu - literal.mu, 3.0 * log_term, 1e-14);
    EXPECT_EQ(proof.lambda, literal.lambda);
    // Large d2: the alpha term 4 alpha / sqrt(d2) shrinks.
    const double a1 = params_col_gaussian(0.0, 10, 100, 1.0).mu;
    const double a2 = params_col_gaussian(0.0, 10, 10000, 1.0).mu;
    EXPECT_NEAR(a2 / a1, 0.1, 1e-14);
}

TEST(Factor, Examples) {
    const long d = 20;
    const PenaltyParams p = params_factor(Matrix::Identity(d, d), d, d, 1.5);
    EXPECT_NEAR(p.lambda, 16.0, 1e-12);
    EXPECT_NEAR(p.mu, 32.0 * std::sqrt(std::log(20.0) / 20.0) + 4.0 * 1.5 / 20.0, 1e-12);

    const Matrix s = random_matrix(5, 5, 3);
    const Matrix cov = s * s.transpose() / 5.0;
    const PenaltyParams a = params_factor(cov, 50, 5, 0.0);
    const PenaltyParams b = params_factor(4.0 * cov, 50, 5, 0.0);
    EXPECT_NEAR(b.lambda / a.lambda, 2.0, 1e-12);
    EXPECT_NEAR(b.mu / a.mu, 4.0, 1e-12);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 2.0;
    diag(1, 1) = 1.0;
    const PenaltyParams c = params_factor(diag, 100, 2, 1.0);
    EXPECT_NEAR(c.lambda, 16.0 * std::sqrt(2.0) * std::sqrt(2.0 / 100.0), 1e-12);
    EXPECT_NEAR(c.mu, 32.0 * 2.0 * std::sqrt(std::log(2.0) / 100.0) + 4.0 / 2.0, 1e-12);
}

TEST(Factor, RejectsNonPsdAndWarnsOnFewSamples) {
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 0) = -1.0;
    EXPECT_THROW(params_factor(bad, 10, 3, 1.0), std::invalid_argument);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5;
    EXPECT_THROW(params_factor(asym, 10, 3, 1.0), std::invalid_argument);
    std::string warning;
    params_factor(Matrix::Identity(3, 3), 2, 3, 1.0, &warning);
    EXPECT_FALSE(warning.empty());
    warning.clear();
    params_factor(Matrix::Identity(3, 3), 30, 3, 1.0, &warning);
    EXPECT_TRUE(warning.empty());
}

TEST(Multitask, Examples) {
    const DesignStats unit{1.0, 1.0, 1.0};
    const long d1 = 30, d2 = 40;
    const PenaltyParams p = params_multitask(1.0, unit, 1, d1, d2, 2.0);
    EXPECT_NEAR(p.lambda, 8.0 * (std::sqrt(30.0) + std::sqrt(40.0)), 1e-12);
    EXPECT_NEAR(p.mu, 16.0 * std::sqrt(std::log(1200.0)) + 8.0 / std::sqrt(1200.0), 1e-12);

    const DesignStats st{0.5, 2.0, 1.5};
    const PenaltyParams z = params_multitask(0.0, st, 9, d1, d2, 2.0);
    EXPECT_EQ(z.lambda, 0.0);
    EXPECT_NEAR(z.mu, 4.0 * 2.0 * 0.5 * 3.0 / std::sqrt(1200.0), 1e-14);

    const long d = 100;
    const DesignStats ex = design_stats(gen_twostep_failure_design(d), 1);
    const PenaltyParams e = params_multitask(0.1, ex, 1, d, d, 1.0);
    EXPECT_NEAR(e.lambda, 8.0 * 0.1 * ex.sigma_max * 20.0, 1e-12);
    EXPECT_NEAR(e.mu, 16.0 * 0.1 * ex.kappa_max * std::sqrt(std::log(1e4)) + 4.0 * ex.sigma_min / 100.0,
                1e-12);
}

TEST(RobustCov, Examples) {
    const PenaltyParams zero_alpha = params_robust_cov(1.7, 3, 50, 10, 0.0);
    EXPECT_EQ(zero_alpha.mu, zero_alpha.lambda);
    EXPECT_NEAR(params_robust_cov(1.0, 4, 32, 10, 1.0).lambda, 1.0, 1e-15);
    const PenaltyParams r0 = params_robust_cov(1.0, 0, 32, 16, 3.0);
    EXPECT_EQ(r0.lambda, 0.0);
    EXPECT_NEAR(r0.mu, 3.0, 1e-15);
}

TEST(Tuning, MuCoversSpikinessTerm) {
    for (long d : {10L, 50L, 200L})
        for (double alpha : {0.5, 2.0, 7.0}) {
            for (double nu : {0.0, 0.3, 1.0}) {
                const PenaltyParams a = params_sparse_gaussian(nu, d, d + 3, alpha);
                EXPECT_GE(a.lambda, 0.0);
                EXPECT_GE(a.mu, 4.0 * 1.0 * alpha / kappa(RegularizerKind::elementwise_l1, d, d + 3));
                const PenaltyParams b = params_col_gaussian(nu, d, d + 3, alpha);
                EXPECT_GE(b.mu, 4.0 * alpha / kappa(RegularizerKind::columnwise_2_1, d, d + 3));
            }
            const PenaltyParams f = params_factor(Matrix::Identity(d, d), 2 * d, d, alpha);
            EXPECT_GT(f.mu, 0.0);
            EXPECT_GE(f.mu, 4.0 * alpha / kappa(RegularizerKind::elementwise_l1, d, d));
            const PenaltyParams r = params_robust_cov(1.0, 2, 3 * d, d, alpha);
            EXPECT_GE(r.mu, 4.0 * alpha / kappa(RegularizerKind::columnwise_2_1, d, d) - 1e-15);
        }
}

TEST(Theorem1Bound, ExactlySparseLowRank) {
    const PenaltyParams p{0.7, 0.3, 1.0};
    const BoundReport b = theorem1_bound(p, 2.0, 0.0, 5, 0.0, 3.0, 0.0);
    EXPECT_NEAR(b.total, 0.49 * 5 / 4.0 + 0.09 * 9 / 4.0, 1e-14);
    EXPECT_TRUE(b.valid);
    EXPECT_EQ(BoundReport::constants_note, "constants = 1");
    EXPECT_EQ(theorem1_bound(p, 1.0, 0.0, 0, 0.0, 0.0, 0.0).total, 0.0);
}

TEST(Theorem1Bound, TermByTerm) {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const double lam = rng.uniform(0.1, 2.0), mu = rng.uniform(0.1, 2.0);
        const double g = rng.uniform(0.5, 2.0), tau = rng.uniform(0.0, 1e-3);
        const long r = static_cast<long>(rng() % 10);
        const double ts = rng.uniform(0.0, 3.0), psi = rng.uniform(0.0, 5.0), tr = rng.uniform(0.0, 3.0);
        const BoundReport b = theorem1_bound({lam, mu, 1.0}, g, tau, r, ts, psi, tr);
        const double kt = (lam * lam / (g * g)) * (r + (g / lam) * ts);
        const double kg = (mu * mu / (g * g)) * (psi * psi + (g / mu) * tr);
        const double kx = (tau / g) * std::pow(ts + (mu / lam) * tr, 2);
        EXPECT_NEAR(b.k_theta, kt, 1e-12 * (1 + kt));
        EXPECT_NEAR(b.k_gamma, kg, 1e-12 * (1 + kg));
        EXPECT_NEAR(b.k_tau, kx, 1e-12 * (1 + kx));
        EXPECT_NEAR(b.total, kt + kg + kx, 1e-12 * (1 + kt + kg + kx));
        const bool ok = 128 * tau * r < g / 4 && 64 * tau * std::pow(psi * mu / lam, 2) < g / 4;
        EXPECT_EQ(b.valid, ok);
        EXPECT_EQ(b.violation.empty(), ok);
    }
}

TEST(Theorem1Bound, MonotoneInEachArgument) {
    Rng rng(6);
    for (int k = 0; k < 200; ++k) {
        const PenaltyParams p{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), 1.0};
        const double g = rng.uniform(0.5, 2.0), tau = rng.uniform(0.0, 0.1);
        const long r = static_cast<long>(rng() % 10);
        const double ts = rng.uniform(0.0, 3.0), psi = rng.uniform(0.0, 5.0), tr = rng.uniform(0.0, 3.0);
        const double base = theorem1_bound(p, g, tau, r, ts, psi, tr).total;
        const double bump = rng.uniform(0.0, 1.0);
        EXPECT_GE(theorem1_bound(p, g, tau, r + 1, ts, psi, tr).total, base);
        EXPECT_GE(theorem1_bound(p, g, tau, r, ts + bump, psi, tr).total, base);
        EXPECT_GE(theorem1_bound(p, g, tau, r, ts, psi, tr + bump).total, base);
        EXPECT_GE(theorem1_bound(p, g, tau + bump, r, ts, psi, tr).total, base);
    }
}

TEST(CorollaryRate, Examples) {
    RateInputs in;
    in.d1 = in.d2 = 100;
    in.nu = 1.0;
    in.alpha = 1.0;
    EXPECT_EQ(corollary_rate(RateKind::sparse_gaussian, in), 0.0);
    in.r = 10;
    in.s = 1000;
    EXPECT_NEAR(corollary_rate(RateKind::sparse_gaussian, in),
                10.0 * 200.0 / 1e4 + 1000.0 * std::log(1e4) / 1e4 + 1000.0 / 1e4, 1e-14);

    RateInputs col;
    col.d1 = 30;
    col.d2 = 50;
    col.r = 4;
    col.s = 6;
    col.alpha = 2.0;
    col.nu = 0.0;
    EXPECT_NEAR(corollary_rate(RateKind::col_gaussian, col), 4.0 * 6.0 / 50.0, 1e-15);
}

TEST(CorollaryRate, NonnegativeAndIncreasing) {
    for (RateKind k : {RateKind::sparse_gaussian, RateKind::col_gaussian, RateKind::factor,
                       RateKind::multitask, RateKind::robust_cov}) {
        RateInputs in;
        in.d1 = in.d2 = 40;
        in.r = 3;
        in.s = 5;
        in.alpha = 2.0;
        in.nu = 0.5;
        in.n = 100;
        in.sigma_op = 2.0;
        in.rho = 1.5;
        in.stats = {0.8, 1.2, 1.1};
        in.theta_opnorm = 1.3;
        const double base = corollary_rate(k, in);
        EXPECT_GT(base, 0.0) << to_string(k);
        in.s += 5;
        EXPECT_GT(corollary_rate(k, in), base) << to_string(k);
    }
}
