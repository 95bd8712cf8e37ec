#pragma once

#include "nmd/matcore.hpp"
#include "nmd/obsop.hpp"
#include "nmd/reg.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace nmd {

struct GroundTruthPair {
    Matrix theta;
    Matrix gamma;
};

/// Observations Y = X(theta* + gamma*) + W together with the penalty
/// parameters of the convex program
///
///   min 0.5 ||Y - X(theta + gamma)||_F^2 + lambda ||theta||_nuc + mu R(gamma)
///   s.t. spikiness(theta) <= alpha.
struct ProblemInstance {
    Matrix y;
    ObservationOperator op;
    RegularizerKind kind = RegularizerKind::elementwise_l1;
    PenaltyParams params;
    std::optional<GroundTruthPair> truth;

    /// Throws DimensionError / std::invalid_argument on inconsistent fields.
    void validate() const;
};

enum class StepRule { fixed_lipschitz, backtracking };

struct SolverConfig {
    int max_iters = 5000;
    double rel_tol = 1e-7;
    int dykstra_iters = 20;
    double dykstra_tol = 1e-9;
    StepRule step_rule = StepRule::fixed_lipschitz;
    /// Function-value restart of the momentum; makes the objective trace
    /// monotone.
    bool restart = true;

    void validate() const;
};

struct DecompositionEstimate {
    Matrix theta_hat;
    Matrix gamma_hat;
    std::vector<double> objective_trace;
    int iterations = 0;
    /// max(0, spikiness(theta_hat) - alpha).
    double feasibility_residual = 0.0;
    bool converged = false;
    /// ||x - T(x)||_F / max(1, ||x||_F) for the proximal gradient map T at the
    /// returned point.
    double fixed_point_residual = 0.0;
    /// Number of inner Dykstra loops that hit dykstra_iters.
    int inexact_prox_calls = 0;
    double step_size = 0.0;

    double final_objective() const {
        return objective_trace.empty() ? 0.0 : objective_trace.back();
    }
};

double objective(const ProblemInstance& inst, const Matrix& theta,
                 const Matrix& gamma);

/// Singular value soft thresholding, the prox of tau ||.||_nuc.
Matrix svt(const Matrix& m, double tau);

struct DykstraReport {
    int rounds = 0;
    bool converged = true;
};

/// Dual pair of the Dykstra loop: p belongs to the svt block, q to the
/// projection block, and the primal iterate is m - p - q. Dykstra is block
/// coordinate ascent on the dual, so any starting pair converges to the same
/// prox; reusing the pair from a nearby input saves most of the rounds.
struct DykstraState {
    Matrix p;
    Matrix q;
};

/// Prox of tau ||.||_nuc plus the spikiness constraint, via proximal Dykstra
/// alternation between svt and the spikiness projection. The last step is
/// always the projection, so the result is feasible even when the loop stops
/// early. A non-null `warm` with matching shapes seeds the dual pair and
/// receives the final one.
Matrix prox_nuclear_constrained(const Matrix& m, double tau, double alpha,
                                RegularizerKind kind, const SolverConfig& cfg,
                                DykstraReport* report = nullptr,
                                DykstraState* warm = nullptr);

/// Accelerated proximal gradient on the joint variable (theta, gamma),
/// started from (0, 0).
DecompositionEstimate solve_composite(const ProblemInstance& inst,
                                      const SolverConfig& cfg = {});

/// Soft threshold Y at mu, then svt the residual at lambda. Only meaningful
/// for identity observations with the l1 regularizer.
DecompositionEstimate two_step(const Matrix& y, double lambda, double mu);

/// Same as above, rejecting instances whose operator is not the identity or
/// whose regularizer is not l1.
DecompositionEstimate two_step(const ProblemInstance& inst);

}  // namespace nmd
