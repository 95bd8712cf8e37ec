#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nmd {

/// Dense real matrix. Every matrix in the library (observations, the
/// low-rank and sparse components, noise) is one of these.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when two matrices that must agree in shape do not.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by iterative factorizations that fail to converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& m, std::string_view what);

/// Throws DimensionError if `m` is not rows x cols.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view what);

std::string shape_string(const Matrix& m);

/// Thin SVD, m = U diag(sigma) V^T with k = min(rows, cols) and sigma
/// sorted nonincreasing.
struct SvdFactors {
    Matrix left;
    Vector singular_values;
    Matrix right;

    Matrix reconstruct() const;
};

SvdFactors svd(const Matrix& m);

/// Number of singular values above 1e-12 * sigma_1.
Eigen::Index numerical_rank(const Vector& singular_values,
                            double rel_cutoff = 1e-12);
Eigen::Index numerical_rank(const Matrix& m, double rel_cutoff = 1e-12);

enum class NormKind {
    frobenius,
    nuclear,
    op,
    elementwise_l1,
    elementwise_linf,
    col_2_1,
    col_2_inf,
};

std::string_view to_string(NormKind kind);

double norm(const Matrix& m, NormKind kind);

/// Trace inner product <a, b> = tr(a^T b).
double inner(const Matrix& a, const Matrix& b);

/// ||theta_hat - theta_star||_F^2 + ||gamma_hat - gamma_star||_F^2.
double decomposition_error(const Matrix& theta_hat, const Matrix& gamma_hat,
                           const Matrix& theta_star, const Matrix& gamma_star);

// Text format: a "rows cols" header line followed by one whitespace
// separated row per line, 17 significant digits.
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);

}  // namespace nmd
