#include "nmd/reg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nmd {

std::string_view to_string(RegularizerKind kind) {
    switch (kind) {
        case RegularizerKind::elementwise_l1: return "l1";
        case RegularizerKind::columnwise_2_1: return "col21";
    }
    return "unknown";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
    if (name == "l1") return RegularizerKind::elementwise_l1;
    if (name == "col21") return RegularizerKind::columnwise_2_1;
    throw std::invalid_argument("unknown regularizer '" + std::string(name) +
                                "' (expected l1 or col21)");
}

// ---------------------------------------------------------------- Support

Support Support::entries(std::vector<Entry> idx) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    Support s(RegularizerKind::elementwise_l1);
    s.entries_ = std::move(idx);
    return s;
}

Support Support::columns(std::vector<Eigen::Index> idx) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    Support s(RegularizerKind::columnwise_2_1);
    s.columns_ = std::move(idx);
    return s;
}

Support Support::empty(RegularizerKind kind) { return Support(kind); }

Support Support::full(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2) {
    Support s(kind);
    if (kind == RegularizerKind::elementwise_l1) {
        s.entries_.reserve(static_cast<std::size_t>(d1 * d2));
        for (Eigen::Index i = 0; i < d1; ++i)
            for (Eigen::Index j = 0; j < d2; ++j) s.entries_.emplace_back(i, j);
    } else {
        for (Eigen::Index j = 0; j < d2; ++j) s.columns_.push_back(j);
    }
    return s;
}

Support Support::of(RegularizerKind kind, const Matrix& g) {
    Support s(kind);
    if (kind == RegularizerKind::elementwise_l1) {
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                if (g(i, j) != 0.0) s.entries_.emplace_back(i, j);
    } else {
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if ((g.col(j).array() != 0.0).any()) s.columns_.push_back(j);
    }
    return s;
}

std::size_t Support::size() const {
    return kind_ == RegularizerKind::elementwise_l1 ? entries_.size()
                                                    : columns_.size();
}

void Support::validate(Eigen::Index d1, Eigen::Index d2) const {
    for (const auto& [i, j] : entries_)
        if (i < 0 || i >= d1 || j < 0 || j >= d2)
            throw std::out_of_range("support entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") outside " +
                                    std::to_string(d1) + "x" + std::to_string(d2));
    for (auto j : columns_)
        if (j < 0 || j >= d2)
            throw std::out_of_range("support column " + std::to_string(j) +
                                    " outside 0.." + std::to_string(d2 - 1));
}

Matrix Support::mask(Eigen::Index d1, Eigen::Index d2) const {
    validate(d1, d2);
    Matrix m = Matrix::Zero(d1, d2);
    for (const auto& [i, j] : entries_) m(i, j) = 1.0;
    for (auto j : columns_) m.col(j).setOnes();
    return m;
}

void PenaltyParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be finite and nonnegative");
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("mu must be finite and nonnegative");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

// ---------------------------------------------------------- regularizers

double reg_value(RegularizerKind kind, const Matrix& g) {
    return norm(g, kind == RegularizerKind::elementwise_l1 ? NormKind::elementwise_l1
                                                          : NormKind::col_2_1);
}

double dual_value(RegularizerKind kind, const Matrix& m) {
    return norm(m, kind == RegularizerKind::elementwise_l1
                       ? NormKind::elementwise_linf
                       : NormKind::col_2_inf);
}

double kappa(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2) {
    if (d1 <= 0 || d2 <= 0)
        throw std::invalid_argument("kappa: dimensions must be positive");
    return kind == RegularizerKind::elementwise_l1
               ? std::sqrt(static_cast<double>(d1) * static_cast<double>(d2))
               : std::sqrt(static_cast<double>(d2));
}

double compatibility(RegularizerKind kind, const Support& support) {
    if (support.kind() != kind)
        throw std::invalid_argument("support kind does not match regularizer");
    return std::sqrt(static_cast<double>(support.size()));
}

Matrix prox(RegularizerKind kind, const Matrix& m, double threshold) {
    if (!(threshold >= 0.0))
        throw std::invalid_argument("prox threshold must be nonnegative");
    if (threshold == 0.0) return m;
    if (kind == RegularizerKind::elementwise_l1) {
        return m.unaryExpr([threshold](double x) {
            const double mag = std::abs(x) - threshold;
            return mag > 0.0 ? std::copysign(mag, x) : 0.0;
        });
    }
    Matrix out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double n = m.col(j).norm();
        if (n <= threshold)
            out.col(j).setZero();
        else
            out.col(j) *= 1.0 - threshold / n;
    }
    return out;
}

double spikiness(RegularizerKind kind, const Matrix& theta) {
    if (theta.size() == 0) return 0.0;
    return kappa(kind, theta.rows(), theta.cols()) * dual_value(kind, theta);
}

double spikiness_cap(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2,
                     double alpha) {
    return alpha / kappa(kind, d1, d2);
}

Matrix project_spikiness_ball(RegularizerKind kind, const Matrix& theta,
                              double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (std::isinf(alpha) || theta.size() == 0) return theta;
    const double cap = spikiness_cap(kind, theta.rows(), theta.cols(), alpha);
    if (kind == RegularizerKind::elementwise_l1)
        return theta.cwiseMax(-cap).cwiseMin(cap);
    Matrix out = theta;
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        const double n = theta.col(j).norm();
        if (n > cap) out.col(j) *= cap / n;
    }
    return out;
}

std::pair<Matrix, Matrix> subspace_split(RegularizerKind kind,
                                         const Support& support,
                                         const Matrix& g) {
    if (support.kind() != kind)
        throw std::invalid_argument("support kind does not match regularizer");
    const Matrix mask = support.mask(g.rows(), g.cols());
    Matrix inside = g.cwiseProduct(mask);
    Matrix outside = g - inside;
    return {std::move(inside), std::move(outside)};
}

}  // namespace nmd
