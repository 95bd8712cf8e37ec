#include "nmd/obsop.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <string>

namespace nmd {

std::string_view to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::identity: return "identity";
        case OperatorKind::multitask: return "multitask";
        case OperatorKind::symmetrized_column: return "symcol";
    }
    return "unknown";
}

OperatorKind parse_operator_kind(std::string_view name) {
    if (name == "identity") return OperatorKind::identity;
    if (name == "multitask") return OperatorKind::multitask;
    if (name == "symcol") return OperatorKind::symmetrized_column;
    throw std::invalid_argument("unknown operator '" + std::string(name) +
                                "' (expected identity, multitask or symcol)");
}

namespace {

// Extreme singular values of a design, with sigma_min = 0 when the design
// has fewer rows than columns.
std::pair<double, double> extreme_singular_values(const Matrix& design) {
    const Vector s = svd(design).singular_values;
    const double smax = s.size() ? s(0) : 0.0;
    const double smin =
        design.rows() < design.cols() || s.size() == 0 ? 0.0 : s(s.size() - 1);
    return {smin, smax};
}

}  // namespace

DesignStats design_stats(const Matrix& design, long n) {
    if (n <= 0) throw std::invalid_argument("design_stats: n must be positive");
    const double root_n = std::sqrt(static_cast<double>(n));
    const auto [smin, smax] = extreme_singular_values(design);
    DesignStats out;
    out.sigma_min = smin / root_n;
    out.sigma_max = smax / root_n;
    out.kappa_max =
        design.size() ? design.colwise().norm().maxCoeff() / root_n : 0.0;
    return out;
}

ObservationOperator::ObservationOperator(OperatorKind kind, Eigen::Index in_rows,
                                         Eigen::Index in_cols,
                                         Eigen::Index out_rows,
                                         Eigen::Index out_cols, Matrix design)
    : kind_(kind),
      in_rows_(in_rows),
      in_cols_(in_cols),
      out_rows_(out_rows),
      out_cols_(out_cols),
      design_(std::move(design)) {
    if (in_rows <= 0 || in_cols <= 0)
        throw std::invalid_argument("observation operator: dimensions must be positive");
}

ObservationOperator ObservationOperator::identity(Eigen::Index d1,
                                                  Eigen::Index d2) {
    return ObservationOperator(OperatorKind::identity, d1, d2, d1, d2, Matrix());
}

ObservationOperator ObservationOperator::multitask(Matrix design,
                                                   Eigen::Index d2) {
    require_finite(design, "design");
    if (design.rows() == 0 || design.cols() == 0)
        throw std::invalid_argument("multitask design must be nonempty");
    const auto n = design.rows();
    const auto d1 = design.cols();
    ObservationOperator op(OperatorKind::multitask, d1, d2, n, d2,
                           std::move(design));
    std::tie(op.design_sigma_min_, op.design_sigma_max_) =
        extreme_singular_values(op.design_);
    return op;
}

ObservationOperator ObservationOperator::symmetrized_column(Eigen::Index d) {
    return ObservationOperator(OperatorKind::symmetrized_column, d, d, d, d,
                               Matrix());
}

const Matrix& ObservationOperator::design() const {
    if (kind_ != OperatorKind::multitask)
        throw std::logic_error("only the multitask operator has a design");
    return design_;
}

Matrix ObservationOperator::apply(const Matrix& theta, const Matrix& gamma) const {
    require_shape(theta, in_rows_, in_cols_, "theta");
    require_shape(gamma, in_rows_, in_cols_, "gamma");
    switch (kind_) {
        case OperatorKind::identity: return theta + gamma;
        case OperatorKind::multitask: return design_ * (theta + gamma);
        case OperatorKind::symmetrized_column:
            return theta + gamma + gamma.transpose();
    }
    throw std::logic_error("unreachable");
}

std::pair<Matrix, Matrix> ObservationOperator::adjoint(
    const Matrix& residual) const {
    require_shape(residual, out_rows_, out_cols_, "residual");
    switch (kind_) {
        case OperatorKind::identity: return {residual, residual};
        case OperatorKind::multitask: {
            Matrix back = design_.transpose() * residual;
            return {back, back};
        }
        case OperatorKind::symmetrized_column:
            return {residual, residual + residual.transpose()};
    }
    throw std::logic_error("unreachable");
}

Curvature ObservationOperator::curvature() const {
    switch (kind_) {
        case OperatorKind::identity: return {1.0, 0.0, false};
        case OperatorKind::multitask: {
            if (design_sigma_min_ <= 1e-12 * design_sigma_max_)
                throw std::domain_error(
                    "zero curvature: multitask design is rank deficient");
            return {design_sigma_min_ * design_sigma_min_, 0.0, false};
        }
        case OperatorKind::symmetrized_column:
            // Worst case along the theta direction; no derived constant exists.
            return {1.0, 0.0, true};
    }
    throw std::logic_error("unreachable");
}

double ObservationOperator::lipschitz() const {
    switch (kind_) {
        case OperatorKind::identity: return 2.0;
        case OperatorKind::multitask:
            return 2.0 * design_sigma_max_ * design_sigma_max_;
        case OperatorKind::symmetrized_column: return 8.0;
    }
    throw std::logic_error("unreachable");
}

}  // namespace nmd
