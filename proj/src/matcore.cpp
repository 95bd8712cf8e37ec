#include "nmd/matcore.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace nmd {

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + " (" + shape_string(m) +
                                    ") has non-finite entries");
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view what) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << what << " is " << shape_string(m) << ", expected " << rows << "x"
           << cols;
        throw DimensionError(os.str());
    }
}

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix SvdFactors::reconstruct() const {
    return left * singular_values.asDiagonal() * right.transpose();
}

SvdFactors svd(const Matrix& m) {
    require_finite(m, "svd input");
    // BDCSVD switches to one-sided Jacobi below its block size.
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw ConvergenceError("svd failed to converge on a " + shape_string(m) +
                               " matrix");
    return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Eigen::Index numerical_rank(const Vector& singular_values, double rel_cutoff) {
    if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
    const double cutoff = rel_cutoff * singular_values(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i)
        if (singular_values(i) > cutoff) ++rank;
    return rank;
}

Eigen::Index numerical_rank(const Matrix& m, double rel_cutoff) {
    if (m.size() == 0) return 0;
    return numerical_rank(svd(m).singular_values, rel_cutoff);
}

std::string_view to_string(NormKind kind) {
    switch (kind) {
        case NormKind::frobenius: return "frobenius";
        case NormKind::nuclear: return "nuclear";
        case NormKind::op: return "operator";
        case NormKind::elementwise_l1: return "elementwise_l1";
        case NormKind::elementwise_linf: return "elementwise_linf";
        case NormKind::col_2_1: return "col_2_1";
        case NormKind::col_2_inf: return "col_2_inf";
    }
    return "unknown";
}

double norm(const Matrix& m, NormKind kind) {
    if (m.size() == 0) return 0.0;
    switch (kind) {
        case NormKind::frobenius: return m.norm();
        case NormKind::nuclear: return svd(m).singular_values.sum();
        case NormKind::op: return svd(m).singular_values(0);
        case NormKind::elementwise_l1: return m.cwiseAbs().sum();
        case NormKind::elementwise_linf: return m.cwiseAbs().maxCoeff();
        case NormKind::col_2_1: return m.colwise().norm().sum();
        case NormKind::col_2_inf: return m.colwise().norm().maxCoeff();
    }
    throw std::invalid_argument("unknown norm kind");
}

double inner(const Matrix& a, const Matrix& b) {
    require_shape(b, a.rows(), a.cols(), "inner product right operand");
    return a.cwiseProduct(b).sum();
}

double decomposition_error(const Matrix& theta_hat, const Matrix& gamma_hat,
                           const Matrix& theta_star, const Matrix& gamma_star) {
    const auto rows = theta_star.rows();
    const auto cols = theta_star.cols();
    require_shape(theta_hat, rows, cols, "theta_hat");
    require_shape(gamma_hat, rows, cols, "gamma_hat");
    require_shape(gamma_star, rows, cols, "gamma_star");
    return (theta_hat - theta_star).squaredNorm() +
           (gamma_hat - gamma_star).squaredNorm();
}

void write_matrix(std::ostream& out, const Matrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    const auto old_flags = out.flags();
    const auto old_prec = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << m(i, j);
        }
        out << '\n';
    }
    out.flags(old_flags);
    out.precision(old_prec);
}

Matrix read_matrix(std::istream& in) {
    long rows = 0;
    long cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw std::runtime_error("matrix text: malformed 'rows cols' header");
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            if (!(in >> m(i, j)))
                throw std::runtime_error("matrix text: expected " +
                                         std::to_string(rows * cols) +
                                         " entries, ran out at row " +
                                         std::to_string(i));
    require_finite(m, "matrix text");
    return m;
}

void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix(out, m);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix(in);
}

}  // namespace nmd
