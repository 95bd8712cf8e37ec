#include "nmd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nmd {

void ProblemInstance::validate() const {
    require_finite(y, "observations");
    require_shape(y, op.out_rows(), op.out_cols(), "observations");
    params.validate();
    if (truth) {
        require_shape(truth->theta, op.in_rows(), op.in_cols(), "true theta");
        require_shape(truth->gamma, op.in_rows(), op.in_cols(), "true gamma");
    }
}

void SolverConfig::validate() const {
    if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (dykstra_iters <= 0)
        throw std::invalid_argument("dykstra_iters must be positive");
    if (!(dykstra_tol > 0.0))
        throw std::invalid_argument("dykstra_tol must be positive");
}

double objective(const ProblemInstance& inst, const Matrix& theta,
                 const Matrix& gamma) {
    const Matrix r = inst.y - inst.op.apply(theta, gamma);
    double value = 0.5 * r.squaredNorm();
    if (inst.params.lambda > 0.0)
        value += inst.params.lambda * norm(theta, NormKind::nuclear);
    if (inst.params.mu > 0.0) value += inst.params.mu * reg_value(inst.kind, gamma);
    return value;
}

Matrix svt(const Matrix& m, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("svt threshold must be nonnegative");
    if (tau == 0.0 || m.size() == 0) return m;
    const SvdFactors f = svd(m);
    const Vector shrunk = (f.singular_values.array() - tau).cwiseMax(0.0);
    const Eigen::Index keep = numerical_rank(shrunk, 0.0);
    if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
    return f.left.leftCols(keep) * shrunk.head(keep).asDiagonal() *
           f.right.leftCols(keep).transpose();
}

Matrix prox_nuclear_constrained(const Matrix& m, double tau, double alpha,
                                RegularizerKind kind, const SolverConfig& cfg,
                                DykstraReport* report, DykstraState* warm) {
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be nonnegative");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    DykstraReport local;
    DykstraReport& rep = report ? *report : local;
    rep = DykstraReport{};
    if (std::isinf(alpha)) {
        rep.rounds = 1;
        return svt(m, tau);
    }
    if (tau == 0.0) {
        rep.rounds = 1;
        return project_spikiness_ball(kind, m, alpha);
    }

    const bool seeded = warm && warm->p.rows() == m.rows() &&
                        warm->p.cols() == m.cols() && warm->q.rows() == m.rows() &&
                        warm->q.cols() == m.cols();
    Matrix p = seeded ? warm->p : Matrix::Zero(m.rows(), m.cols());
    Matrix q = seeded ? warm->q : Matrix::Zero(m.rows(), m.cols());
    // Invariant: x + p + q = m.
    Matrix x = m - p - q;
    rep.converged = false;
    for (int round = 1; round <= cfg.dykstra_iters; ++round) {
        const Matrix y = svt(x + p, tau);
        p += x - y;
        Matrix x_next = project_spikiness_ball(kind, y + q, alpha);
        q += y - x_next;
        const double change = (x_next - x).norm();
        x = std::move(x_next);
        rep.rounds = round;
        // From a cold start, an inactive projection on the first round means
        // svt(m) is feasible and therefore already the answer.
        if ((!seeded && round == 1 && q.isZero(0.0)) ||
            change <= cfg.dykstra_tol * std::max(1.0, x.norm())) {
            rep.converged = true;
            break;
        }
    }
    if (warm) {
        warm->p = std::move(p);
        warm->q = std::move(q);
    }
    return x;
}

namespace {

struct Point {
    Matrix theta;
    Matrix gamma;

    double squared_norm() const { return theta.squaredNorm() + gamma.squaredNorm(); }
};

double distance(const Point& a, const Point& b) {
    return std::sqrt((a.theta - b.theta).squaredNorm() +
                     (a.gamma - b.gamma).squaredNorm());
}

class ProxGradient {
public:
    ProxGradient(const ProblemInstance& inst, const SolverConfig& cfg)
        : inst_(inst), cfg_(cfg) {}

    double smooth(const Point& x) const {
        return 0.5 * (inst_.y - inst_.op.apply(x.theta, x.gamma)).squaredNorm();
    }

    double total(const Point& x) const {
        return objective(inst_, x.theta, x.gamma);
    }

    /// Gradient of the smooth part at x, returned as (grad_theta, grad_gamma).
    Point gradient(const Point& x) const {
        const Matrix r = inst_.y - inst_.op.apply(x.theta, x.gamma);
        auto [gt, gg] = inst_.op.adjoint(r);
        return Point{-gt, -gg};
    }

    Point step(const Point& y, const Point& grad, double s) {
        Point out;
        DykstraReport rep;
        SolverConfig inner = cfg_;
        inner.dykstra_iters = cfg_.dykstra_iters * boost_;
        out.theta = prox_nuclear_constrained(y.theta - s * grad.theta,
                                             s * inst_.params.lambda,
                                             inst_.params.alpha, inst_.kind, inner,
                                             &rep, &dual_);
        if (!rep.converged) ++inexact_;
        out.gamma = prox(inst_.kind, y.gamma - s * grad.gamma, s * inst_.params.mu);
        return out;
    }

    /// Quadratic upper bound test used by backtracking.
    bool sufficient_decrease(const Point& y, const Point& grad, const Point& x,
                             double s) const {
        const Matrix dt = x.theta - y.theta;
        const Matrix dg = x.gamma - y.gamma;
        const double lin = grad.theta.cwiseProduct(dt).sum() +
                           grad.gamma.cwiseProduct(dg).sum();
        const double quad = (dt.squaredNorm() + dg.squaredNorm()) / (2.0 * s);
        const double lhs = smooth(x);
        const double rhs = smooth(y) + lin + quad;
        return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
    }

    int inexact() const { return inexact_; }

    DykstraState dual() const { return dual_; }
    void set_dual(DykstraState d) { dual_ = std::move(d); }

    /// Raises the inner round budget; returns false once it is exhausted.
    bool sharpen() {
        if (boost_ >= 64) return false;
        boost_ *= 4;
        return true;
    }
    /// True when the prox is exact anyway (no constraint to alternate with).
    bool exact_prox() const { return std::isinf(inst_.params.alpha); }

private:
    const ProblemInstance& inst_;
    const SolverConfig& cfg_;
    DykstraState dual_;
    int inexact_ = 0;
    int boost_ = 1;
};

}  // namespace

DecompositionEstimate solve_composite(const ProblemInstance& inst,
                                      const SolverConfig& cfg) {
    inst.validate();
    cfg.validate();
    const auto d1 = inst.op.in_rows();
    const auto d2 = inst.op.in_cols();

    ProxGradient pg(inst, cfg);
    double s = 1.0 / inst.op.lipschitz();
    if (cfg.step_rule == StepRule::backtracking) s *= 4.0;

    Point x{Matrix::Zero(d1, d2), Matrix::Zero(d1, d2)};
    Point y = x;
    double t = 1.0;
    double fx = pg.total(x);
    bool momentum = false;

    DecompositionEstimate est;
    est.objective_trace.push_back(fx);

    for (int it = 1; it <= cfg.max_iters; ++it) {
        est.iterations = it;
        const Point grad = pg.gradient(y);
        const DykstraState saved = pg.dual();
        Point next = pg.step(y, grad, s);
        if (cfg.step_rule == StepRule::backtracking) {
            while (!pg.sufficient_decrease(y, grad, next, s) && s > 1e-12) {
                s *= 0.5;
                next = pg.step(y, grad, s);
            }
        }
        const double fnext = pg.total(next);

        if (cfg.restart && fnext > fx) {
            pg.set_dual(saved);
            if (momentum) {
                // Drop the momentum and retake the step from x.
                y = x;
                t = 1.0;
                momentum = false;
                continue;
            }
            // The plain step can only fail through an inexact prox; give
            // Dykstra more rounds and retry.
            if (!pg.exact_prox() && pg.sharpen()) continue;
            // A plain step that fails to decrease the objective means we are at
            // the resolution of the (possibly inexact) prox.
            est.converged = fnext - fx <= cfg.rel_tol * std::max(std::abs(fx), 1e-300);
            break;
        }

        const double change = std::abs(fx - fnext);
        const double gap = distance(next, y) / std::max(1.0, std::sqrt(next.squared_norm()));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        Point y_next{next.theta + beta * (next.theta - x.theta),
                     next.gamma + beta * (next.gamma - x.gamma)};
        momentum = beta > 0.0;
        x = std::move(next);
        y = std::move(y_next);
        t = t_next;
        fx = fnext;
        est.objective_trace.push_back(fx);

        // gap is the fixed-point residual at y; requiring it too keeps a
        // momentarily flat objective from stopping the run early.
        if (change <= cfg.rel_tol * std::max(std::abs(fx), 1e-300) &&
            gap <= cfg.rel_tol) {
            est.converged = true;
            break;
        }
    }

    // Fixed-point certificate at the returned point.
    {
        const Point grad = pg.gradient(x);
        const Point tx = pg.step(x, grad, s);
        est.fixed_point_residual =
            distance(x, tx) / std::max(1.0, std::sqrt(x.squared_norm()));
    }

    est.step_size = s;
    est.inexact_prox_calls = pg.inexact();
    est.feasibility_residual =
        std::isinf(inst.params.alpha)
            ? 0.0
            : std::max(0.0, spikiness(inst.kind, x.theta) - inst.params.alpha);
    est.theta_hat = std::move(x.theta);
    est.gamma_hat = std::move(x.gamma);
    return est;
}

DecompositionEstimate two_step(const Matrix& y, double lambda, double mu) {
    require_finite(y, "observations");
    if (!(lambda >= 0.0) || !(mu >= 0.0))
        throw std::invalid_argument("two_step: lambda and mu must be nonnegative");
    DecompositionEstimate est;
    est.gamma_hat = prox(RegularizerKind::elementwise_l1, y, mu);
    est.theta_hat = svt(y - est.gamma_hat, lambda);
    const Matrix r = y - est.theta_hat - est.gamma_hat;
    est.objective_trace.push_back(0.5 * r.squaredNorm() +
                                  lambda * norm(est.theta_hat, NormKind::nuclear) +
                                  mu * reg_value(RegularizerKind::elementwise_l1,
                                                 est.gamma_hat));
    est.iterations = 2;
    est.converged = true;
    return est;
}

DecompositionEstimate two_step(const ProblemInstance& inst) {
    inst.validate();
    if (inst.op.kind() != OperatorKind::identity)
        throw std::invalid_argument(
            "two_step requires the identity observation operator: with a general "
            "design (e.g. X = I + e1 1^T / sqrt(d)) ||X(theta*)||_inf can exceed "
            "||theta*||_inf by a factor sqrt(d) and thresholding Y no longer "
            "separates the sparse part");
    if (inst.kind != RegularizerKind::elementwise_l1)
        throw std::invalid_argument("two_step supports only the l1 regularizer");
    DecompositionEstimate est = two_step(inst.y, inst.params.lambda, inst.params.mu);
    est.feasibility_residual =
        std::isinf(inst.params.alpha)
            ? 0.0
            : std::max(0.0, spikiness(inst.kind, est.theta_hat) - inst.params.alpha);
    return est;
}

}  // namespace nmd
