#pragma once

#include "nmd/matcore.hpp"

#include <limits>
#include <string_view>
#include <utility>
#include <vector>

namespace nmd {

/// The two decomposable regularizers for the sparse component.
enum class RegularizerKind { elementwise_l1, columnwise_2_1 };

std::string_view to_string(RegularizerKind kind);
/// Accepts the CLI names {l1, col21}.
RegularizerKind parse_regularizer_kind(std::string_view name);

/// Index set defining the model subspace: entries (row, col) for the l1
/// regularizer, column indices for the (2,1) regularizer. Stored sorted and
/// duplicate free.
class Support {
public:
    using Entry = std::pair<Eigen::Index, Eigen::Index>;

    static Support entries(std::vector<Entry> idx);
    static Support columns(std::vector<Eigen::Index> idx);
    static Support empty(RegularizerKind kind);
    /// The whole index set of a d1 x d2 matrix.
    static Support full(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2);
    /// Nonzero pattern of g (nonzero entries or nonzero columns).
    static Support of(RegularizerKind kind, const Matrix& g);

    RegularizerKind kind() const { return kind_; }
    std::size_t size() const;
    const std::vector<Entry>& entry_list() const { return entries_; }
    const std::vector<Eigen::Index>& column_list() const { return columns_; }

    /// Throws std::out_of_range if an index falls outside d1 x d2.
    void validate(Eigen::Index d1, Eigen::Index d2) const;
    /// 0/1 matrix marking the support.
    Matrix mask(Eigen::Index d1, Eigen::Index d2) const;

    friend bool operator==(const Support&, const Support&) = default;

private:
    explicit Support(RegularizerKind kind) : kind_(kind) {}

    RegularizerKind kind_;
    std::vector<Entry> entries_;
    std::vector<Eigen::Index> columns_;
};

/// Weights of the nuclear norm (lambda) and the sparse regularizer (mu), and
/// the spikiness radius alpha. alpha = +inf removes the constraint.
struct PenaltyParams {
    double lambda = 0.0;
    double mu = 0.0;
    double alpha = std::numeric_limits<double>::infinity();

    void validate() const;
};

double reg_value(RegularizerKind kind, const Matrix& g);
double dual_value(RegularizerKind kind, const Matrix& m);

/// kappa_d(R*): sqrt(d1 d2) for l1, sqrt(d2) for (2,1).
double kappa(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2);

/// Subspace compatibility constant Psi(M(support)) = sqrt(|support|).
double compatibility(RegularizerKind kind, const Support& support);

/// argmin_Z 0.5 ||Z - m||_F^2 + threshold R(Z): soft thresholding of entries
/// (l1) or of column norms (2,1).
Matrix prox(RegularizerKind kind, const Matrix& m, double threshold);

/// phi_R(theta) = kappa * R*(theta).
double spikiness(RegularizerKind kind, const Matrix& theta);

/// Largest admissible entry magnitude (l1) or column norm (2,1) under the
/// spikiness bound alpha.
double spikiness_cap(RegularizerKind kind, Eigen::Index d1, Eigen::Index d2,
                     double alpha);

/// Euclidean projection onto {Z : spikiness(Z) <= alpha}.
Matrix project_spikiness_ball(RegularizerKind kind, const Matrix& theta,
                              double alpha);

/// Orthogonal split of g into its part on the support and the remainder.
std::pair<Matrix, Matrix> subspace_split(RegularizerKind kind,
                                         const Support& support,
                                         const Matrix& g);

}  // namespace nmd
