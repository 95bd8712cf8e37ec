#include "nmd/bench.hpp"

#include "nmd/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace nmd {

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::rank_sweep: return "rank_sweep";
        case Experiment::sparsity_sweep: return "sparsity_sweep";
        case Experiment::dimension_sweep: return "dimension_sweep";
        case Experiment::twostep_compare: return "twostep_compare";
        case Experiment::twostep_failure: return "twostep_failure";
        case Experiment::badpair_check: return "badpair_check";
        case Experiment::rate_band: return "rate_band";
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view name) {
    for (auto e : {Experiment::rank_sweep, Experiment::sparsity_sweep,
                   Experiment::dimension_sweep, Experiment::twostep_compare,
                   Experiment::twostep_failure, Experiment::badpair_check,
                   Experiment::rate_band})
        if (to_string(e) == name) return e;
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep grid must be nonempty");
    if (trials < 1) throw std::invalid_argument("sweep trials must be >= 1");
    if (d <= 0) throw std::invalid_argument("sweep dimension must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("sweep alpha must be positive");
    if (!(magnitude >= 0.0)) throw std::invalid_argument("sweep magnitude must be nonnegative");
    nmd::validate(noise);
    if (std::holds_alternative<WishartNoise>(noise))
        throw std::invalid_argument("sweeps support Gaussian noise only");
    if (experiment == Experiment::dimension_sweep && ranks.empty())
        throw std::invalid_argument("dimension sweep needs at least one rank");
    if (experiment == Experiment::rate_band &&
        (rank_fracs.empty() || rank_fracs.size() != sparsity_fracs.size()))
        throw std::invalid_argument("rate band needs matching rank/sparsity fractions");
    solver.validate();
}

SweepSpec default_spec(Experiment e) {
    SweepSpec spec;
    spec.experiment = e;
    switch (e) {
        case Experiment::rank_sweep:
            for (int k = 1; k <= 10; ++k) spec.grid.push_back(0.05 * k);
            break;
        case Experiment::sparsity_sweep:
            spec.r = 10;
            for (int k = 0; k < 10; ++k) spec.grid.push_back(0.01 + 0.01 * k);
            break;
        case Experiment::dimension_sweep:
            spec.kind = RegularizerKind::columnwise_2_1;
            spec.ranks = {10, 15};
            for (long d = 100; d <= 300; d += 25) spec.grid.push_back(static_cast<double>(d));
            break;
        case Experiment::twostep_compare:
            spec.d = 60;
            spec.r = 5;
            spec.s = 180;
            spec.trials = 20;
            spec.grid = {0.0};
            break;
        case Experiment::twostep_failure:
            spec.d = 100;
            spec.r = 1;
            spec.s = 20;
            spec.alpha = 1.0;
            spec.noise = GaussianNoise{0.1};
            spec.trials = 20;
            spec.grid = {0.0};
            break;
        case Experiment::badpair_check:
            spec.d = 50;
            spec.s = 10;
            spec.alpha = 1.0;
            spec.noise = NoNoise{};
            spec.trials = 1;
            spec.grid = {10.0};
            break;
        case Experiment::rate_band:
            spec.rank_fracs = {0.05, 0.1, 0.2};
            spec.sparsity_fracs = {0.01, 0.02, 0.05};
            spec.grid = {60.0, 100.0, 140.0};
            break;
    }
    return spec;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t grid_index, int trial) {
    return derive_seed(derive_seed(base, grid_index), static_cast<std::uint64_t>(trial));
}

namespace {

using Clock = std::chrono::steady_clock;

double nu_of(const NoiseModel& noise) {
    if (const auto* g = std::get_if<GaussianNoise>(&noise)) return g->nu;
    return 0.0;
}

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Instance {
    Matrix theta;
    Matrix gamma;
    Matrix noise;
};

Instance draw_instance(RegularizerKind kind, long d, long r, long s, double alpha,
                       double magnitude, double nu, std::uint64_t seed) {
    Instance in;
    in.theta = gen_low_rank(d, d, r, alpha, kind, derive_seed(seed, 0));
    in.gamma = gen_sparse(d, d, s, kind, magnitude, derive_seed(seed, 1)).matrix;
    in.noise = gen_gaussian_noise(d, d, nu, derive_seed(seed, 2));
    return in;
}

ResultRow base_row(const SweepSpec& spec, double grid_value, int trial,
                   std::uint64_t seed, long d, long r, long s,
                   const PenaltyParams& p) {
    ResultRow row;
    row.experiment = std::string(to_string(spec.experiment));
    row.grid_value = grid_value;
    row.trial = trial;
    row.seed = seed;
    row.d1 = d;
    row.d2 = d;
    row.r = r;
    row.s = s;
    row.lambda = p.lambda;
    row.mu = p.mu;
    row.alpha = p.alpha;
    return row;
}

void record_solve(ResultRow& row, const DecompositionEstimate& est,
                  const Instance& in, const SweepSpec& spec, Clock::time_point start) {
    row.e_squared = decomposition_error(est.theta_hat, est.gamma_hat, in.theta, in.gamma);
    row.iterations = est.iterations;
    row.converged = est.converged;
    if (spec.timing) row.wall_time_ms = elapsed_ms(start);
}

// Identity operator, l1 or col21, Gaussian noise, tuning matched to kind.
ResultRow solve_identity_row(const SweepSpec& spec, double grid_value, int trial,
                             std::uint64_t seed, long d, long r, long s) {
    const auto start = Clock::now();
    const double nu = nu_of(spec.noise);
    const PenaltyParams p =
        spec.kind == RegularizerKind::elementwise_l1
            ? params_sparse_gaussian(nu, d, d, spec.alpha)
            : params_col_gaussian(nu, d, d, spec.alpha, spec.paper_literal);
    const Instance in = draw_instance(spec.kind, d, r, s, spec.alpha, spec.magnitude, nu, seed);
    ProblemInstance inst{in.theta + in.gamma + in.noise,
                         ObservationOperator::identity(d, d), spec.kind, p,
                         GroundTruthPair{in.theta, in.gamma}};
    const DecompositionEstimate est = solve_composite(inst, spec.solver);

    ResultRow row = base_row(spec, grid_value, trial, seed, d, r, s, p);
    RateInputs ri;
    ri.d1 = d;
    ri.d2 = d;
    ri.r = r;
    ri.s = s;
    ri.alpha = spec.alpha;
    ri.nu = nu;
    row.predicted_rate = corollary_rate(spec.kind == RegularizerKind::elementwise_l1
                                            ? RateKind::sparse_gaussian
                                            : RateKind::col_gaussian,
                                        ri);
    record_solve(row, est, in, spec, start);
    return row;
}

long checked_round(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
    return std::lround(v);
}

}  // namespace

std::vector<ResultRow> run_rank_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const long r = checked_round(spec.grid[g] * static_cast<double>(spec.d), "rank");
        for (int t = 0; t < spec.trials; ++t)
            rows.push_back(solve_identity_row(spec, spec.grid[g], t,
                                              trial_seed(spec.base_seed, g, t), spec.d,
                                              r, spec.s));
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_sparsity_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows;
    const double cells = static_cast<double>(spec.d) * static_cast<double>(spec.d);
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const long s = checked_round(spec.grid[g] * cells, "sparsity");
        for (int t = 0; t < spec.trials; ++t)
            rows.push_back(solve_identity_row(spec, spec.grid[g], t,
                                              trial_seed(spec.base_seed, g, t), spec.d,
                                              spec.r, s));
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_dimension_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const long d = checked_round(spec.grid[g], "dimension");
        for (std::size_t k = 0; k < spec.ranks.size(); ++k) {
            const long r = spec.ranks[k];
            for (int t = 0; t < spec.trials; ++t) {
                const std::uint64_t seed =
                    derive_seed(trial_seed(spec.base_seed, g, t), 100 + k);
                rows.push_back(solve_identity_row(spec, spec.grid[g], t, seed, d, r, 3 * r));
            }
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_twostep_compare(const SweepSpec& spec) {
    spec.validate();
    if (spec.kind != RegularizerKind::elementwise_l1)
        throw std::invalid_argument("two-step comparison needs the l1 regularizer");
    std::vector<ResultRow> rows;
    const double nu = nu_of(spec.noise);
    const long d = spec.d;
    const PenaltyParams p = params_sparse_gaussian(nu, d, d, spec.alpha);
    for (int t = 0; t < spec.trials; ++t) {
        const std::uint64_t seed = trial_seed(spec.base_seed, 0, t);
        const Instance in =
            draw_instance(spec.kind, d, spec.r, spec.s, spec.alpha, spec.magnitude, nu, seed);
        ProblemInstance inst{in.theta + in.gamma + in.noise,
                             ObservationOperator::identity(d, d), spec.kind, p,
                             GroundTruthPair{in.theta, in.gamma}};
        RateInputs ri;
        ri.d1 = d;
        ri.d2 = d;
        ri.r = spec.r;
        ri.s = spec.s;
        ri.alpha = spec.alpha;
        ri.nu = nu;
        const double rate = corollary_rate(RateKind::sparse_gaussian, ri);

        auto start = Clock::now();
        ResultRow convex = base_row(spec, kConvexMethod, t, seed, d, spec.r, spec.s, p);
        convex.predicted_rate = rate;
        record_solve(convex, solve_composite(inst, spec.solver), in, spec, start);
        rows.push_back(convex);

        start = Clock::now();
        ResultRow split = base_row(spec, kTwoStepMethod, t, seed, d, spec.r, spec.s, p);
        split.predicted_rate = rate;
        record_solve(split, two_step(inst), in, spec, start);
        rows.push_back(split);
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_twostep_failure(const SweepSpec& spec) {
    spec.validate();
    const long d = spec.d;
    const double nu = nu_of(spec.noise);
    const Matrix design = gen_twostep_failure_design(d);
    const ObservationOperator op = ObservationOperator::multitask(design, d);
    const DesignStats stats = design_stats(design, 1);
    // The entries of W have standard deviation nu / d; the multitask rule is
    // stated for unit-scale noise on n = 1 observation per task.
    const double nu_entry = nu / static_cast<double>(d);
    const PenaltyParams p = params_multitask(nu_entry, stats, 1, d, d, spec.alpha);
    const Matrix theta = Matrix::Constant(d, d, 1.0 / static_cast<double>(d));
    RateInputs ri;
    ri.d1 = d;
    ri.d2 = d;
    ri.r = 1;
    ri.s = spec.s;
    ri.alpha = spec.alpha;
    ri.nu = nu_entry;
    ri.n = 1;
    ri.stats = stats;
    const double rate = corollary_rate(RateKind::multitask, ri);

    std::vector<ResultRow> rows;
    for (int t = 0; t < spec.trials; ++t) {
        const std::uint64_t seed = trial_seed(spec.base_seed, 0, t);
        Instance in;
        in.theta = theta;
        in.gamma = gen_sparse(d, d, spec.s, RegularizerKind::elementwise_l1,
                              spec.magnitude, derive_seed(seed, 1))
                       .matrix;
        in.noise = gen_gaussian_noise(d, d, nu, derive_seed(seed, 2));
        ProblemInstance inst{op.apply(in.theta, in.gamma) + in.noise, op,
                             RegularizerKind::elementwise_l1, p,
                             GroundTruthPair{in.theta, in.gamma}};

        auto start = Clock::now();
        ResultRow convex = base_row(spec, kConvexMethod, t, seed, d, 1, spec.s, p);
        convex.predicted_rate = rate;
        record_solve(convex, solve_composite(inst, spec.solver), in, spec, start);
        rows.push_back(convex);

        // Applied naively: the observations are thresholded as if X were I.
        start = Clock::now();
        ResultRow split = base_row(spec, kTwoStepMethod, t, seed, d, 1, spec.s, p);
        split.predicted_rate = rate;
        record_solve(split, two_step(inst.y, p.lambda, p.mu), in, spec, start);
        rows.push_back(split);
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_badpair_check(const SweepSpec& spec,
                                         std::vector<double>* worst) {
    spec.validate();
    const long d = spec.d;
    const double nu = nu_of(spec.noise);
    // W = 0, so any positive weights give the same answer from Y = 0; the
    // Gaussian rules at nu (or nu = 1 when noiseless) keep lambda > 0.
    const double tune_nu = nu > 0.0 ? nu : 1.0;
    const PenaltyParams p = spec.kind == RegularizerKind::elementwise_l1
                                ? params_sparse_gaussian(tune_nu, d, d, spec.alpha)
                                : params_col_gaussian(tune_nu, d, d, spec.alpha,
                                                      spec.paper_literal);
    std::vector<ResultRow> rows;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const long s = checked_round(spec.grid[g], "sparsity");
        const GroundTruth gt = bad_pair(spec.kind, d, d, s, spec.alpha);
        const double radius =
            spec.kind == RegularizerKind::elementwise_l1
                ? spec.alpha * spec.alpha * static_cast<double>(s) /
                      (static_cast<double>(d) * static_cast<double>(d))
                : spec.alpha * spec.alpha * static_cast<double>(s) / static_cast<double>(d);
        for (int t = 0; t < spec.trials; ++t) {
            const auto start = Clock::now();
            const std::uint64_t seed = trial_seed(spec.base_seed, g, t);
            ProblemInstance inst{gt.theta_star + gt.gamma_star,
                                 ObservationOperator::identity(d, d), spec.kind, p,
                                 GroundTruthPair{gt.theta_star, gt.gamma_star}};
            const DecompositionEstimate est = solve_composite(inst, spec.solver);
            ResultRow row = base_row(spec, spec.grid[g], t, seed, d, gt.rank, s, p);
            const Matrix zero = Matrix::Zero(d, d);
            const double e_pair = decomposition_error(est.theta_hat, est.gamma_hat,
                                                      gt.theta_star, gt.gamma_star);
            const double e_zero =
                decomposition_error(est.theta_hat, est.gamma_hat, zero, zero);
            row.e_squared = std::min(e_pair, e_zero);
            if (worst) worst->push_back(std::max(e_pair, e_zero));
            row.predicted_rate = radius;
            row.iterations = est.iterations;
            row.converged = est.converged;
            if (spec.timing) row.wall_time_ms = elapsed_ms(start);
            rows.push_back(row);
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_rate_band(const SweepSpec& spec) {
    spec.validate();
    if (spec.kind != RegularizerKind::elementwise_l1)
        throw std::invalid_argument("rate band uses the l1 regularizer");
    std::vector<ResultRow> rows;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const long d = checked_round(spec.grid[g], "dimension");
        const double dd = static_cast<double>(d);
        for (std::size_t k = 0; k < spec.rank_fracs.size(); ++k) {
            const long r = std::max(1L, checked_round(spec.rank_fracs[k] * dd, "rank"));
            const long s = checked_round(spec.sparsity_fracs[k] * dd * dd, "sparsity");
            for (int t = 0; t < spec.trials; ++t) {
                const std::uint64_t seed =
                    derive_seed(trial_seed(spec.base_seed, g, t), 100 + k);
                rows.push_back(solve_identity_row(spec, spec.grid[g], t, seed, d, r, s));
            }
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    switch (spec.experiment) {
        case Experiment::rank_sweep: return run_rank_sweep(spec);
        case Experiment::sparsity_sweep: return run_sparsity_sweep(spec);
        case Experiment::dimension_sweep: return run_dimension_sweep(spec);
        case Experiment::twostep_compare: return run_twostep_compare(spec);
        case Experiment::twostep_failure: return run_twostep_failure(spec);
        case Experiment::badpair_check: return run_badpair_check(spec, nullptr);
        case Experiment::rate_band: return run_rate_band(spec);
    }
    throw std::invalid_argument("unknown experiment");
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.grid_value != b.grid_value) return a.grid_value < b.grid_value;
        if (a.trial != b.trial) return a.trial < b.trial;
        if (a.r != b.r) return a.r < b.r;
        if (a.s != b.s) return a.s < b.s;
        return a.d1 < b.d1;
    });
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

GridMeans grid_means(const std::vector<ResultRow>& rows,
                     double (*value)(const ResultRow&)) {
    std::map<double, std::pair<double, int>> acc;
    for (const auto& row : rows) {
        auto& slot = acc[row.grid_value];
        slot.first += value(row);
        slot.second += 1;
    }
    GridMeans out;
    for (const auto& [g, sum] : acc) {
        out.grid.push_back(g);
        out.mean.push_back(sum.first / sum.second);
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

CheckOutcome check_linear(const std::vector<ResultRow>& rows, double min_r2,
                          double (*value)(const ResultRow&)) {
    const GridMeans m = grid_means(rows, value);
    const LinearFit fit = fit_line(m.grid, m.mean);
    CheckOutcome out;
    out.pass = fit.r_squared >= min_r2 && fit.slope > 0.0;
    out.detail = "slope=" + fmt_g(fit.slope) + " R2=" + fmt_g(fit.r_squared) +
                 " (need R2>=" + fmt_g(min_r2) + ", slope>0)";
    return out;
}

double e_squared_of(const ResultRow& r) { return r.e_squared; }
double inverse_e_squared_of(const ResultRow& r) { return 1.0 / r.e_squared; }

std::vector<double> paired_ratios(const std::vector<ResultRow>& rows) {
    std::map<int, std::pair<double, double>> by_trial;
    for (const auto& r : rows) {
        auto& slot = by_trial[r.trial];
        (r.grid_value == kConvexMethod ? slot.first : slot.second) = r.e_squared;
    }
    std::vector<double> ratios;
    for (const auto& [t, pair] : by_trial) ratios.push_back(pair.second / pair.first);
    return ratios;
}

}  // namespace

CheckOutcome check_sweep(const SweepSpec& spec, const std::vector<ResultRow>& rows,
                         const std::vector<double>* worst) {
    if (rows.empty()) return {false, "no rows"};
    switch (spec.experiment) {
        case Experiment::rank_sweep: return check_linear(rows, 0.9, e_squared_of);
        case Experiment::sparsity_sweep: return check_linear(rows, 0.85, e_squared_of);
        case Experiment::dimension_sweep: {
            CheckOutcome out{true, ""};
            std::vector<long> ranks = spec.ranks;
            std::sort(ranks.begin(), ranks.end());
            std::vector<double> slopes;
            for (long r : ranks) {
                std::vector<ResultRow> sub;
                for (const auto& row : rows)
                    if (row.r == r) sub.push_back(row);
                const GridMeans m = grid_means(sub, inverse_e_squared_of);
                const LinearFit fit = fit_line(m.grid, m.mean);
                slopes.push_back(fit.slope);
                const bool ok = fit.r_squared >= 0.9;
                out.pass = out.pass && ok;
                out.detail += "r=" + std::to_string(r) + ": slope=" + fmt_g(fit.slope) +
                              " R2=" + fmt_g(fit.r_squared) + "; ";
            }
            if (ranks.size() == 2) {
                const double ratio = slopes[0] / slopes[1];
                const double target =
                    static_cast<double>(ranks[1]) / static_cast<double>(ranks[0]);
                const bool ok = ratio >= 0.8 * target && ratio <= 1.2 * target;
                out.pass = out.pass && ok;
                out.detail += "slope ratio=" + fmt_g(ratio) + " (need [" +
                              fmt_g(0.8 * target) + ", " + fmt_g(1.2 * target) + "])";
            }
            return out;
        }
        case Experiment::twostep_compare: {
            const double med = median(paired_ratios(rows));
            return {med >= 1.0 / 3.0 && med <= 3.0,
                    "median two-step/convex=" + fmt_g(med) + " (need [1/3, 3])"};
        }
        case Experiment::twostep_failure: {
            const double med = median(paired_ratios(rows));
            return {med >= 2.0, "median two-step/convex=" + fmt_g(med) + " (need >= 2)"};
        }
        case Experiment::badpair_check: {
            if (!worst || worst->size() != rows.size())
                return {false, "worst-case errors not supplied"};
            CheckOutcome out{true, ""};
            double tightest = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double margin = (*worst)[i] / (0.25 * rows[i].predicted_rate);
                tightest = std::min(tightest, margin);
                if (margin < 1.0) out.pass = false;
            }
            out.detail = "min over rows of max error / (radius/4)=" + fmt_g(tightest) +
                         " (need >= 1)";
            return out;
        }
        case Experiment::rate_band: {
            std::map<std::tuple<double, long, long>, std::pair<double, int>> cells;
            for (const auto& r : rows) {
                auto& c = cells[{r.grid_value, r.r, r.s}];
                c.first += r.e_squared / r.predicted_rate;
                c.second += 1;
            }
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (const auto& [key, c] : cells) {
                const double m = c.first / c.second;
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
            const double spread = hi / lo;
            return {spread <= 3.0, "ratio range [" + fmt_g(lo) + ", " + fmt_g(hi) +
                                       "] spread=" + fmt_g(spread) + " (need <= 3)"};
        }
    }
    return {false, "unknown experiment"};
}

namespace {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << "\r\n";
    for (const auto& r : rows) {
        out << csv_field(r.experiment) << ',' << fmt_real(r.grid_value) << ','
            << r.trial << ',' << r.seed << ',' << r.d1 << ',' << r.d2 << ',' << r.r
            << ',' << r.s << ',' << fmt_real(r.lambda) << ',' << fmt_real(r.mu) << ','
            << fmt_real(r.alpha) << ',' << fmt_real(r.e_squared) << ','
            << fmt_real(r.predicted_rate) << ',' << r.iterations << ','
            << (r.converged ? 1 : 0) << ',' << fmt_real(r.wall_time_ms) << "\r\n";
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    for (const auto& r : rows)
        if (r.experiment != rows.front().experiment)
            throw std::invalid_argument("emit_csv: rows mix experiments '" +
                                        rows.front().experiment + "' and '" +
                                        r.experiment + "'");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, rows);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw std::runtime_error("'" + path + "' does not start with the result header");
    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 16)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 16 fields");
        try {
            ResultRow r;
            r.experiment = f[0];
            r.grid_value = std::stod(f[1]);
            r.trial = std::stoi(f[2]);
            r.seed = std::stoull(f[3]);
            r.d1 = std::stol(f[4]);
            r.d2 = std::stol(f[5]);
            r.r = std::stol(f[6]);
            r.s = std::stol(f[7]);
            r.lambda = std::stod(f[8]);
            r.mu = std::stod(f[9]);
            r.alpha = std::stod(f[10]);
            r.e_squared = std::stod(f[11]);
            r.predicted_rate = std::stod(f[12]);
            r.iterations = std::stoi(f[13]);
            r.converged = f[14] == "1";
            r.wall_time_ms = std::stod(f[15]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed field");
        }
    }
    return rows;
}

void write_gnuplot(std::ostream& out, const std::vector<ResultRow>& rows) {
    std::map<long, std::vector<ResultRow>> blocks;
    for (const auto& r : rows) blocks[r.r].push_back(r);
    bool first = true;
    for (const auto& [rank, block] : blocks) {
        if (!first) out << "\n\n";
        first = false;
        out << "# " << (block.empty() ? "" : block.front().experiment) << " r=" << rank
            << "\n# grid mean_e2 mean_inv_e2 count\n";
        const GridMeans e2 = grid_means(block, e_squared_of);
        const GridMeans inv = grid_means(block, inverse_e_squared_of);
        for (std::size_t i = 0; i < e2.grid.size(); ++i) {
            long count = 0;
            for (const auto& r : block)
                if (r.grid_value == e2.grid[i]) ++count;
            out << fmt_real(e2.grid[i]) << ' ' << fmt_real(e2.mean[i]) << ' '
                << fmt_real(inv.mean[i]) << ' ' << count << '\n';
        }
    }
}

}  // namespace nmd
