#pragma once

#include "nmd/matcore.hpp"

#include <optional>
#include <string_view>
#include <utility>

namespace nmd {

enum class OperatorKind { identity, multitask, symmetrized_column };

std::string_view to_string(OperatorKind kind);
/// Accepts the CLI names {identity, multitask, symcol}.
OperatorKind parse_operator_kind(std::string_view name);

/// Restricted strong convexity constants of the quadratic loss.
struct Curvature {
    double gamma = 1.0;
    double tau = 0.0;
    /// True when gamma is a conservative choice rather than a derived value.
    bool conservative = false;
};

/// Singular values of design / sqrt(n) and its largest column norm.
struct DesignStats {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double kappa_max = 0.0;
};

DesignStats design_stats(const Matrix& design, long n);

/// The linear map taking the pair (theta, gamma) to the noiseless
/// observation. Three variants:
///
///  - identity:            theta + gamma
///  - multitask:           X (theta + gamma), X an n x d1 design of full
///                         column rank
///  - symmetrized_column:  theta + gamma + gamma^T, square inputs
///
/// The last one encodes the robust covariance loss, so a single solver serves
/// every model.
class ObservationOperator {
public:
    static ObservationOperator identity(Eigen::Index d1, Eigen::Index d2);
    static ObservationOperator multitask(Matrix design, Eigen::Index d2);
    static ObservationOperator symmetrized_column(Eigen::Index d);

    OperatorKind kind() const { return kind_; }
    Eigen::Index in_rows() const { return in_rows_; }
    Eigen::Index in_cols() const { return in_cols_; }
    Eigen::Index out_rows() const { return out_rows_; }
    Eigen::Index out_cols() const { return out_cols_; }
    const Matrix& design() const;

    Matrix apply(const Matrix& theta, const Matrix& gamma) const;

    /// Adjoint of the joint map, split into the theta and gamma blocks.
    std::pair<Matrix, Matrix> adjoint(const Matrix& residual) const;

    /// Throws std::domain_error("zero curvature") for a rank-deficient design.
    Curvature curvature() const;

    /// Upper bound on the Lipschitz constant of the gradient of
    /// 0.5 ||Y - apply(theta, gamma)||_F^2 in the joint variable.
    double lipschitz() const;

private:
    ObservationOperator(OperatorKind kind, Eigen::Index in_rows,
                        Eigen::Index in_cols, Eigen::Index out_rows,
                        Eigen::Index out_cols, Matrix design);

    OperatorKind kind_;
    Eigen::Index in_rows_, in_cols_, out_rows_, out_cols_;
    Matrix design_;
    double design_sigma_min_ = 1.0;
    double design_sigma_max_ = 1.0;
};

}  // namespace nmd
