#pragma once

#include "nmd/matcore.hpp"
#include "nmd/reg.hpp"

#include <cstdint>
#include <limits>
#include <random>

namespace nmd {

/// SplitMix64: a 64-bit counter-based generator. The state advances by the
/// constant 0x9e3779b97f4a7c15 and each output is a fixed bijective mix of
/// the counter, so the stream is a pure function of the seed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()();

    /// Standard normal deviate.
    double normal();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

private:
    std::uint64_t state_;
    std::normal_distribution<double> gauss_;
};

/// SplitMix64 finalizer applied to one 64-bit word.
std::uint64_t mix64(std::uint64_t x);

/// Seed of trial `index` in a run with base seed `base`:
/// mix64(base ^ mix64(index + 0x9e3779b97f4a7c15)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// A synthetic truth pair with its generating parameters.
struct GroundTruth {
    Matrix theta_star;
    Matrix gamma_star;
    long rank = 0;
    long sparsity = 0;
    double alpha_used = 0.0;
    /// ||theta_star||_F after spikiness enforcement.
    double theta_frobenius = 0.0;
};

/// Rank-r matrix U diag(sigma) V^T with Haar-distributed orthonormal factors
/// and sigma_i ~ U[0.5, 1.5], scaled to unit Frobenius norm and then brought
/// inside the spikiness ball of radius alpha without raising the rank: the
/// (2,1) case rescales offending columns (the exact projection), the l1 case
/// shrinks the whole matrix.
Matrix gen_low_rank(long d1, long d2, long r, double alpha, RegularizerKind kind,
                    std::uint64_t seed);

struct SparseDraw {
    Matrix matrix;
    Support support;
};

/// s entries (l1) or s dense columns (col21) chosen uniformly without
/// replacement, values i.i.d. U[-magnitude, magnitude].
SparseDraw gen_sparse(long d1, long d2, long s, RegularizerKind kind,
                      double magnitude, std::uint64_t seed);

/// i.i.d. N(0, nu^2 / (d1 d2)) entries.
Matrix gen_gaussian_noise(long d1, long d2, double nu, std::uint64_t seed);

/// (1/n) sum_i Z_i Z_i^T - sigma with Z_i ~ N(0, sigma). Symmetric.
Matrix gen_wishart_noise(const Matrix& sigma, long n, std::uint64_t seed);

/// Sample covariance of n draws U_i + v_i with U_i ~ N(0, theta_star) and
/// v_i supported on corrupt_cols with U[-magnitude, magnitude] entries. The
/// U_i stream matches gen_wishart_noise(theta_star, n, seed). If `clean` is
/// given it receives (1/n) sum U_i U_i^T.
Matrix gen_robust_cov_instance(const Matrix& theta_star, const Support& corrupt_cols,
                               long n, double magnitude, std::uint64_t seed,
                               Matrix* clean = nullptr);

/// Non-identifiable pair with theta* + gamma* = 0 and spikiness exactly alpha:
/// l1: theta* = alpha / sqrt(d1 d2) e_1 f^T, col21: alpha / sqrt(d1 d2) 1 f^T,
/// where f has ones in its first s slots; gamma* = -theta*.
GroundTruth bad_pair(RegularizerKind kind, long d1, long d2, long s, double alpha);

/// I + e_1 1^T / sqrt(d): well conditioned, yet it spreads a row sum of
/// theta* into the first row of the observations.
Matrix gen_twostep_failure_design(long d);

}  // namespace nmd
