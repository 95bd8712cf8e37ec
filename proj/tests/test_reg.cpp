#include "helpers.hpp"

#include "nmd/reg.hpp"
#include "nmd/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace nmd;
using nmd::testing::random_matrix;

namespace {

constexpr auto kL1 = RegularizerKind::elementwise_l1;
constexpr auto kCol = RegularizerKind::columnwise_2_1;
const RegularizerKind kBoth[] = {kL1, kCol};

double sum_abs(const Matrix& m) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) s += std::abs(m.data()[i]);
    return s;
}

double sum_col_norms(const Matrix& m) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double c = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) c += m(i, j) * m(i, j);
        s += std::sqrt(c);
    }
    return s;
}

double reg_oracle(RegularizerKind kind, const Matrix& m) {
    return kind == kL1 ? sum_abs(m) : sum_col_norms(m);
}

double prox_objective(RegularizerKind kind, const Matrix& z, const Matrix& m, double t) {
    return 0.5 * (z - m).squaredNorm() + t * reg_oracle(kind, z);
}

// Nearly extreme points of the unit R-ball: one dominant entry (l1) or one
// dominant column (2,1), obtained by raising Gaussian weights to a high power.
Matrix sharp_unit_sample(RegularizerKind kind, Rng& rng, long d1, long d2) {
    Matrix v(d1, d2);
    for (long i = 0; i < d1; ++i)
        for (long j = 0; j < d2; ++j) v(i, j) = rng.normal();
    if (kind == kL1) {
        v = v.unaryExpr([](double x) { return std::copysign(std::pow(std::abs(x), 8.0), x); });
    } else {
        for (long j = 0; j < d2; ++j) v.col(j) *= std::pow(std::abs(rng.normal()), 8.0);
    }
    return v / reg_oracle(kind, v);
}

// Projection of x onto {|z| <= b} by bisection on the derivative of (z - x)^2.
double clip_oracle(double x, double b) {
    double lo = -b, hi = b;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid - x < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Projection of v onto the l2 ball of radius b via the KKT form
// z = v / (1 + eta), eta >= 0 found by bisection.
Vector ball_oracle(const Vector& v, double b) {
    if (v.norm() <= b) return v;
    double lo = 0.0, hi = 1.0;
    while (v.norm() / (1.0 + hi) > b) hi *= 2.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (v.norm() / (1.0 + mid) > b) lo = mid; else hi = mid;
    }
    return v / (1.0 + 0.5 * (lo + hi));
}

}  // namespace

TEST(RegValue, Examples) {
    Matrix a(2, 2);
    a << 1, -2, 0, 3;
    EXPECT_DOUBLE_EQ(reg_value(kL1, a), 6.0);
    Matrix b(2, 2);
    b << 3, 0, 4, 0;
    EXPECT_DOUBLE_EQ(reg_value(kCol, b), 5.0);
    EXPECT_EQ(reg_value(kL1, Matrix::Zero(3, 3)), 0.0);
    EXPECT_EQ(reg_value(kCol, Matrix::Zero(3, 3)), 0.0);
}

TEST(DualValue, Examples) {
    Matrix a(2, 2);
    a << 1, -7, 2, 0;
    EXPECT_DOUBLE_EQ(dual_value(kL1, a), 7.0);
    Matrix b(2, 2);
    b << 3, 1, 4, 0;
    EXPECT_DOUBLE_EQ(dual_value(kCol, b), 5.0);
}

TEST(DualValue, SampledHolderOracle) {
    Rng rng(2024);
    for (RegularizerKind kind : kBoth) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const Matrix m = random_matrix(2, 3, seed);
            const double dual = dual_value(kind, m);
            double best = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < 1000; ++k) {
                const Matrix v = sharp_unit_sample(kind, rng, 2, 3);
                const double ip = (m.array() * v.array()).sum();
                EXPECT_LE(ip, dual * (1.0 + 1e-12));
                best = std::max(best, ip);
            }
            EXPECT_GE(best, 0.95 * dual) << to_string(kind) << " seed " << seed;
        }
    }
}

TEST(DualValue, DualitySandwich) {
    for (RegularizerKind kind : kBoth)
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const Matrix u = random_matrix(3, 4, seed);
            const Matrix v = random_matrix(3, 4, seed + 500);
            EXPECT_LE(inner(u, v), dual_value(kind, u) * reg_value(kind, v) + 1e-12);
        }
}

TEST(Kappa, Examples) {
    EXPECT_DOUBLE_EQ(kappa(kL1, 4, 9), 6.0);
    EXPECT_DOUBLE_EQ(kappa(kCol, 7, 16), 4.0);
    EXPECT_DOUBLE_EQ(kappa(kCol, 1, 16), 4.0);
    EXPECT_DOUBLE_EQ(kappa(kL1, 1, 1), 1.0);
    EXPECT_THROW(kappa(kL1, 0, 3), std::invalid_argument);
}

TEST(Compatibility, Examples) {
    std::vector<Support::Entry> e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.emplace_back(i, j);
    EXPECT_DOUBLE_EQ(compatibility(kL1, Support::entries(e)), 3.0);
    EXPECT_DOUBLE_EQ(compatibility(kCol, Support::columns({0, 2, 5, 7})), 2.0);
    EXPECT_EQ(compatibility(kL1, Support::empty(kL1)), 0.0);
    EXPECT_THROW(compatibility(kL1, Support::columns({1})), std::invalid_argument);
}

TEST(Support, SortedDeduplicatedAndValidated) {
    const Support s = Support::entries({{2, 1}, {0, 3}, {2, 1}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.entry_list()[0], (Support::Entry{0, 3}));
    EXPECT_NO_THROW(s.validate(3, 4));
    EXPECT_THROW(s.validate(2, 4), std::out_of_range);
    const Support c = Support::columns({4, 1, 4});
    EXPECT_EQ(c.column_list(), (std::vector<Eigen::Index>{1, 4}));
    EXPECT_THROW(c.validate(3, 4), std::out_of_range);
    EXPECT_EQ(Support::full(kL1, 2, 3).size(), 6u);
    EXPECT_EQ(Support::full(kCol, 2, 3).size(), 3u);

    Matrix g = Matrix::Zero(3, 3);
    g(1, 2) = 4.0;
    g(0, 0) = -1.0;
    EXPECT_EQ(Support::of(kL1, g), Support::entries({{0, 0}, {1, 2}}));
    EXPECT_EQ(Support::of(kCol, g), Support::columns({0, 2}));
    const Matrix mask = Support::of(kCol, g).mask(3, 3);
    EXPECT_EQ(mask.col(0).sum(), 3.0);
    EXPECT_EQ(mask.col(1).sum(), 0.0);
}

TEST(Prox, ClosedFormsExact) {
    Matrix m(1, 2);
    m << 3.0, -0.5;
    const Matrix p = prox(kL1, m, 1.0);
    EXPECT_EQ(p(0, 0), 2.0);
    EXPECT_EQ(p(0, 1), 0.0);

    Matrix c(2, 1);
    c << 3.0, 4.0;
    const Matrix q = prox(kCol, c, 2.5);
    EXPECT_NEAR(q(0, 0), 1.5, 1e-12);
    EXPECT_NEAR(q(1, 0), 2.0, 1e-12);

    const Matrix r = random_matrix(3, 3, 1);
    for (RegularizerKind kind : kBoth) EXPECT_EQ((prox(kind, r, 0.0) - r).norm(), 0.0);
    EXPECT_THROW(prox(kL1, r, -1.0), std::invalid_argument);
}

TEST(Prox, ColumnEdgeCases) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 3.0;
    m(1, 1) = 4.0;
    const Matrix p = prox(kCol, m, 5.0);  // tie at the threshold
    EXPECT_EQ(p.norm(), 0.0);
    const Matrix z = prox(kCol, Matrix::Zero(2, 2), 1.0);
    EXPECT_FALSE(z.hasNaN());
    EXPECT_EQ(z.norm(), 0.0);
}

TEST(Prox, SubgradientCertificate) {
    for (RegularizerKind kind : kBoth)
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const Matrix m = random_matrix(3, 4, seed);
            const double t = 0.2 + 0.01 * static_cast<double>(seed % 100);
            const Matrix p = prox(kind, m, t);
            const Matrix g = (m - p) / t;
            // g must lie in the subdifferential of R at p.
            if (kind == kL1) {
                for (Eigen::Index i = 0; i < p.size(); ++i) {
                    const double pi = p.data()[i], gi = g.data()[i];
                    if (pi != 0.0) EXPECT_NEAR(gi, std::copysign(1.0, pi), 1e-12);
                    else EXPECT_LE(std::abs(gi), 1.0 + 1e-12);
                }
            } else {
                for (Eigen::Index j = 0; j < p.cols(); ++j) {
                    const double pn = p.col(j).norm();
                    if (pn > 0.0) EXPECT_LE((g.col(j) - p.col(j) / pn).norm(), 1e-12);
                    else EXPECT_LE(g.col(j).norm(), 1.0 + 1e-12);
                }
            }
        }
}

TEST(Prox, PerturbationOracle) {
    Rng rng(77);
    for (RegularizerKind kind : kBoth)
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const Matrix m = random_matrix(3, 3, seed);
            const double t = 0.7;
            const Matrix p = prox(kind, m, t);
            const double base = prox_objective(kind, p, m, t);
            for (int k = 0; k < 100; ++k) {
                Matrix d(3, 3);
                for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = rng.normal();
                d *= 1e-3 / d.norm();
                EXPECT_LE(base, prox_objective(kind, p + d, m, t));
            }
        }
}

TEST(Prox, PositiveHomogeneity) {
    for (RegularizerKind kind : kBoth)
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            const Matrix m = random_matrix(4, 3, seed);
            const double c = 0.5 + static_cast<double>(seed) / 10.0;
            EXPECT_LE((prox(kind, c * m, c * 0.8) - c * prox(kind, m, 0.8)).cwiseAbs().maxCoeff(),
                      1e-12 * c);
        }
}

TEST(Spikiness, Examples) {
    EXPECT_NEAR(spikiness(kL1, Matrix::Constant(10, 10, 0.1)), 1.0, 1e-15);
    Matrix m = Matrix::Zero(3, 4);
    m(0, 2) = 0.3;
    m(1, 2) = 0.4;
    EXPECT_NEAR(spikiness(kCol, m), 1.0, 1e-15);
    for (RegularizerKind kind : kBoth) {
        const GroundTruth bad = bad_pair(kind, 6, 8, 3, 2.5);
        EXPECT_NEAR(spikiness(kind, bad.theta_star), 2.5, 1e-14);
    }
    EXPECT_DOUBLE_EQ(spikiness_cap(kL1, 4, 9, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(spikiness_cap(kCol, 4, 9, 3.0), 1.0);
}

TEST(Projection, ClipAndFeasibleAndInfinite) {
    EXPECT_EQ(project_spikiness_ball(kL1, Matrix::Constant(1, 1, 10.0), 1.0)(0, 0), 1.0);
    const Matrix small = Matrix::Constant(3, 3, 0.01);
    for (RegularizerKind kind : kBoth) {
        EXPECT_EQ((project_spikiness_ball(kind, small, 1.0) - small).norm(), 0.0);
        const Matrix big = random_matrix(3, 3, 4, 100.0);
        EXPECT_EQ((project_spikiness_ball(kind, big, std::numeric_limits<double>::infinity()) - big)
                      .norm(),
                  0.0);
    }
    EXPECT_THROW(project_spikiness_ball(kL1, small, 0.0), std::invalid_argument);
}

TEST(Projection, MatchesSeparableOracle) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Matrix th = random_matrix(4, 4, seed);
        const double alpha = 1.0 + 0.05 * static_cast<double>(seed);

        const Matrix p = project_spikiness_ball(kL1, th, alpha);
        const double b = alpha / 4.0;
        for (Eigen::Index i = 0; i < th.size(); ++i)
            EXPECT_NEAR(p.data()[i], clip_oracle(th.data()[i], b), 1e-12);

        const Matrix q = project_spikiness_ball(kCol, th, alpha);
        const double bc = alpha / 2.0;
        for (Eigen::Index j = 0; j < 4; ++j)
            EXPECT_LE((q.col(j) - ball_oracle(th.col(j), bc)).norm(), 1e-12);
    }
}

TEST(Projection, FeasibleAndIdempotent) {
    for (RegularizerKind kind : kBoth)
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const Matrix th = random_matrix(5, 3, seed, 2.0);
            const double alpha = 0.5 + 0.03 * static_cast<double>(seed);
            const Matrix p = project_spikiness_ball(kind, th, alpha);
            EXPECT_LE(spikiness(kind, p), alpha + 1e-12);
            EXPECT_LE((project_spikiness_ball(kind, p, alpha) - p).norm(), 1e-15);
        }
}

TEST(SubspaceSplit, FullAndEmpty) {
    const Matrix g = random_matrix(3, 4, 5);
    for (RegularizerKind kind : kBoth) {
        const auto [in_full, out_full] = subspace_split(kind, Support::full(kind, 3, 4), g);
        EXPECT_EQ((in_full - g).norm(), 0.0);
        EXPECT_EQ(out_full.norm(), 0.0);
        const auto [in_empty, out_empty] = subspace_split(kind, Support::empty(kind), g);
        EXPECT_EQ(in_empty.norm(), 0.0);
        EXPECT_EQ((out_empty - g).norm(), 0.0);
    }
}

TEST(SubspaceSplit, DecomposabilityOnRandomSupports) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Matrix g = random_matrix(5, 6, seed);
        Rng rng(seed * 31);
        std::vector<Support::Entry> e;
        std::vector<Eigen::Index> c;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 6; ++j)
                if (rng() % 3 == 0) e.emplace_back(i, j);
        for (int j = 0; j < 6; ++j)
            if (rng() % 2 == 0) c.push_back(j);
        const Support supports[] = {Support::entries(e), Support::columns(c)};
        for (const Support& s : supports) {
            const auto kind = s.kind();
            const auto [u, v] = subspace_split(kind, s, g);
            EXPECT_LE((u + v - g).norm(), 1e-15);
            EXPECT_NEAR(reg_value(kind, u) + reg_value(kind, v), reg_value(kind, g), 1e-12);
            // Decomposability for an independent pair in M and its complement.
            const Matrix w = random_matrix(5, 6, seed + 999);
            const auto [u2, v2] = subspace_split(kind, s, w);
            EXPECT_NEAR(reg_value(kind, u + v2), reg_value(kind, u) + reg_value(kind, v2), 1e-12);
        }
    }
}

TEST(PenaltyParams, Validate) {
    EXPECT_NO_THROW((PenaltyParams{1.0, 1.0, 2.0}.validate()));
    EXPECT_NO_THROW((PenaltyParams{0.0, 0.0, std::numeric_limits<double>::infinity()}.validate()));
    EXPECT_THROW((PenaltyParams{-1.0, 1.0, 2.0}.validate()), std::invalid_argument);
    EXPECT_THROW((PenaltyParams{1.0, std::nan(""), 2.0}.validate()), std::invalid_argument);
    EXPECT_THROW((PenaltyParams{1.0, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST(ParseRegularizer, Names) {
    EXPECT_EQ(parse_regularizer_kind("l1"), kL1);
    EXPECT_EQ(parse_regularizer_kind("col21"), kCol);
    EXPECT_THROW(parse_regularizer_kind("l2"), std::invalid_argument);
}
