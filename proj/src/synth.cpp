#include "nmd/synth.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmd {

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::result_type Rng::operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double Rng::normal() { return gauss_(*this); }

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(*this);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

namespace {

Matrix gaussian_matrix(long rows, long cols, Rng& rng) {
    Matrix m(rows, cols);
    // Row-major fill keeps the draw order aligned with the text format.
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

// Haar-distributed d x r matrix with orthonormal columns.
Matrix random_orthonormal(long d, long r, Rng& rng) {
    const Matrix g = gaussian_matrix(d, r, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, r);
    const Matrix rfac = qr.matrixQR().topLeftCorner(r, r);
    for (long k = 0; k < r; ++k)
        if (rfac(k, k) < 0.0) q.col(k) = -q.col(k);
    return q;
}

// Symmetric square root factor L with L L^T = sigma (sigma PSD).
Matrix psd_factor(const Matrix& sigma, const char* what) {
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument(std::string(what) + " must be square");
    require_finite(sigma, what);
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument(std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
    const Vector ev = eig.eigenvalues();
    if (ev.size() && ev.minCoeff() < -1e-10 * std::max(1.0, ev.maxCoeff()))
        throw std::invalid_argument(std::string(what) + " is not positive semidefinite");
    return eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Accumulates (1/n) sum_i Z_i Z_i^T for n draws Z_i = factor * g_i, in
// batches so memory stays bounded.
Matrix sample_second_moment(const Matrix& factor, long n, Rng& rng,
                            const Matrix* shift = nullptr, Rng* shift_rng = nullptr,
                            double magnitude = 0.0) {
    const long d = factor.rows();
    Matrix acc = Matrix::Zero(d, d);
    constexpr long batch = 4096;
    for (long start = 0; start < n; start += batch) {
        const long m = std::min(batch, n - start);
        Matrix z(d, m);
        for (long c = 0; c < m; ++c)
            for (long i = 0; i < d; ++i) z(i, c) = rng.normal();
        z = factor * z;
        if (shift) {
            // shift is a 0/1 column indicator of the corrupted coordinates.
            for (long c = 0; c < m; ++c)
                for (long i = 0; i < d; ++i)
                    if ((*shift)(i, 0) != 0.0)
                        z(i, c) += shift_rng->uniform(-magnitude, magnitude);
        }
        acc.selfadjointView<Eigen::Lower>().rankUpdate(z);
    }
    acc = acc.selfadjointView<Eigen::Lower>();
    return acc / static_cast<double>(n);
}

}  // namespace

Matrix gen_low_rank(long d1, long d2, long r, double alpha, RegularizerKind kind,
                    std::uint64_t seed) {
    if (d1 <= 0 || d2 <= 0)
        throw std::invalid_argument("gen_low_rank: dimensions must be positive");
    if (r < 0 || r > std::min(d1, d2))
        throw std::out_of_range("gen_low_rank: rank " + std::to_string(r) +
                                " outside [0, " + std::to_string(std::min(d1, d2)) +
                                "]");
    if (!(alpha > 0.0)) throw std::invalid_argument("gen_low_rank: alpha must be positive");
    if (r == 0) return Matrix::Zero(d1, d2);

    Rng rng(seed);
    const Matrix u = random_orthonormal(d1, r, rng);
    const Matrix v = random_orthonormal(d2, r, rng);
    Vector sigma(r);
    for (long k = 0; k < r; ++k) sigma(k) = rng.uniform(0.5, 1.5);
    Matrix theta = u * sigma.asDiagonal() * v.transpose();
    theta /= theta.norm();

    if (std::isinf(alpha)) return theta;
    if (kind == RegularizerKind::columnwise_2_1)
        return project_spikiness_ball(kind, theta, alpha);
    const double spike = spikiness(kind, theta);
    if (spike > alpha) theta *= alpha / spike;
    return theta;
}

SparseDraw gen_sparse(long d1, long d2, long s, RegularizerKind kind,
                      double magnitude, std::uint64_t seed) {
    if (d1 <= 0 || d2 <= 0)
        throw std::invalid_argument("gen_sparse: dimensions must be positive");
    if (!(magnitude >= 0.0))
        throw std::invalid_argument("gen_sparse: magnitude must be nonnegative");
    const long slots = kind == RegularizerKind::elementwise_l1 ? d1 * d2 : d2;
    if (s < 0 || s > slots)
        throw std::out_of_range("gen_sparse: s = " + std::to_string(s) +
                                " outside [0, " + std::to_string(slots) + "]");
    Rng rng(seed);
    // Partial Fisher-Yates over the slot indices.
    std::vector<long> pool(static_cast<std::size_t>(slots));
    std::iota(pool.begin(), pool.end(), 0L);
    for (long k = 0; k < s; ++k) {
        std::uniform_int_distribution<long> pick(k, slots - 1);
        std::swap(pool[k], pool[pick(rng)]);
    }
    std::vector<long> chosen(pool.begin(), pool.begin() + s);
    std::sort(chosen.begin(), chosen.end());

    Matrix g = Matrix::Zero(d1, d2);
    if (kind == RegularizerKind::elementwise_l1) {
        std::vector<Support::Entry> entries;
        entries.reserve(chosen.size());
        for (long idx : chosen) {
            const long i = idx / d2;
            const long j = idx % d2;
            g(i, j) = rng.uniform(-magnitude, magnitude);
            entries.emplace_back(i, j);
        }
        return {std::move(g), Support::entries(std::move(entries))};
    }
    std::vector<Eigen::Index> cols(chosen.begin(), chosen.end());
    for (long j : chosen)
        for (long i = 0; i < d1; ++i) g(i, j) = rng.uniform(-magnitude, magnitude);
    return {std::move(g), Support::columns(std::move(cols))};
}

Matrix gen_gaussian_noise(long d1, long d2, double nu, std::uint64_t seed) {
    if (d1 <= 0 || d2 <= 0)
        throw std::invalid_argument("gen_gaussian_noise: dimensions must be positive");
    if (!(nu >= 0.0)) throw std::invalid_argument("gen_gaussian_noise: nu must be nonnegative");
    if (nu == 0.0) return Matrix::Zero(d1, d2);
    Rng rng(seed);
    const double sd = nu / std::sqrt(static_cast<double>(d1) * static_cast<double>(d2));
    return sd * gaussian_matrix(d1, d2, rng);
}

Matrix gen_wishart_noise(const Matrix& sigma, long n, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("gen_wishart_noise: n must be positive");
    const Matrix factor = psd_factor(sigma, "Wishart covariance");
    Rng rng(seed);
    Matrix w = sample_second_moment(factor, n, rng) - sigma;
    return 0.5 * (w + w.transpose());
}

Matrix gen_robust_cov_instance(const Matrix& theta_star, const Support& corrupt_cols,
                               long n, double magnitude, std::uint64_t seed,
                               Matrix* clean) {
    if (n <= 0) throw std::invalid_argument("gen_robust_cov_instance: n must be positive");
    if (!(magnitude >= 0.0))
        throw std::invalid_argument("gen_robust_cov_instance: magnitude must be nonnegative");
    if (corrupt_cols.kind() != RegularizerKind::columnwise_2_1)
        throw std::invalid_argument("corruption support must be a column set");
    const Matrix factor = psd_factor(theta_star, "theta_star");
    const long d = theta_star.rows();
    corrupt_cols.validate(d, d);

    if (clean) {
        Rng rng(seed);
        *clean = sample_second_moment(factor, n, rng);
    }
    Rng rng(seed);
    if (corrupt_cols.size() == 0 || magnitude == 0.0)
        return sample_second_moment(factor, n, rng);
    Matrix indicator = Matrix::Zero(d, 1);
    for (auto j : corrupt_cols.column_list()) indicator(j, 0) = 1.0;
    Rng shift_rng(derive_seed(seed, 1));
    return sample_second_moment(factor, n, rng, &indicator, &shift_rng, magnitude);
}

GroundTruth bad_pair(RegularizerKind kind, long d1, long d2, long s, double alpha) {
    if (d1 <= 0 || d2 <= 0)
        throw std::invalid_argument("bad_pair: dimensions must be positive");
    if (s < 0 || s > d2)
        throw std::out_of_range("bad_pair: s must lie in [0, d2]");
    if (!(alpha > 0.0) || std::isinf(alpha))
        throw std::invalid_argument("bad_pair: alpha must be positive and finite");
    const double level = alpha / std::sqrt(static_cast<double>(d1) * static_cast<double>(d2));
    GroundTruth gt;
    gt.theta_star = Matrix::Zero(d1, d2);
    if (kind == RegularizerKind::elementwise_l1)
        gt.theta_star.row(0).head(s).setConstant(level);
    else
        gt.theta_star.leftCols(s).setConstant(level);
    gt.gamma_star = -gt.theta_star;
    gt.rank = s > 0 ? 1 : 0;
    gt.sparsity = s;
    gt.alpha_used = alpha;
    gt.theta_frobenius = gt.theta_star.norm();
    return gt;
}

Matrix gen_twostep_failure_design(long d) {
    if (d < 2) throw std::invalid_argument("gen_twostep_failure_design: d must be >= 2");
    Matrix x = Matrix::Identity(d, d);
    x.row(0).array() += 1.0 / std::sqrt(static_cast<double>(d));
    return x;
}

}  // namespace nmd
