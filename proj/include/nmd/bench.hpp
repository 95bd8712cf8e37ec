#pragma once

#include "nmd/matcore.hpp"
#include "nmd/reg.hpp"
#include "nmd/solver.hpp"
#include "nmd/tuning.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nmd {

enum class Experiment {
    rank_sweep,
    sparsity_sweep,
    dimension_sweep,
    twostep_compare,
    twostep_failure,
    badpair_check,
    rate_band
};

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

/// One sweep. Fields past `output_path` fix the instance family; their
/// defaults are the ones of the rank sweep and are overridden per experiment
/// by default_spec().
struct SweepSpec {
    Experiment experiment = Experiment::rank_sweep;
    std::vector<double> grid;
    int trials = 5;
    std::uint64_t base_seed = 1;
    NoiseModel noise = GaussianNoise{1.0};
    std::string output_path;

    RegularizerKind kind = RegularizerKind::elementwise_l1;
    long d = 100;
    long r = 10;
    long s = 2171;
    double alpha = 5.0;
    double magnitude = 1.0;
    /// dimension_sweep: one curve per rank. rate_band: (r, s) given as
    /// fractions (r / d, s / d^2) in rank_fracs / sparsity_fracs.
    std::vector<long> ranks;
    std::vector<double> rank_fracs;
    std::vector<double> sparsity_fracs;
    bool paper_literal = false;
    /// Fill wall_time_ms; off by default so reruns are byte identical.
    bool timing = false;
    SolverConfig solver;

    void validate() const;
};

/// Defaults of each experiment.
SweepSpec default_spec(Experiment e);

/// Columns are written in declaration order.
struct ResultRow {
    std::string experiment;
    double grid_value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    long d1 = 0;
    long d2 = 0;
    long r = 0;
    long s = 0;
    double lambda = 0.0;
    double mu = 0.0;
    double alpha = 0.0;
    double e_squared = 0.0;
    double predicted_rate = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_time_ms = 0.0;
};

/// Method codes carried in the grid_value column of the paired experiments.
inline constexpr double kConvexMethod = 0.0;
inline constexpr double kTwoStepMethod = 1.0;

/// Seed of trial t at grid index g.
std::uint64_t trial_seed(std::uint64_t base, std::size_t grid_index, int trial);

// Every runner returns rows sorted by (grid value, trial).
std::vector<ResultRow> run_rank_sweep(const SweepSpec& spec);
std::vector<ResultRow> run_sparsity_sweep(const SweepSpec& spec);
/// Grid values are dimensions; one row per (d, rank, trial).
std::vector<ResultRow> run_dimension_sweep(const SweepSpec& spec);
/// Grid values are ignored; rows come in (convex, two-step) pairs sharing
/// seed and truth, told apart by grid_value = kConvexMethod / kTwoStepMethod.
std::vector<ResultRow> run_twostep_compare(const SweepSpec& spec);
/// Same pairing on the I + e1 1^T / sqrt(d) design with theta* = 11^T / d.
std::vector<ResultRow> run_twostep_failure(const SweepSpec& spec);
/// Grid values are sparsities s. e_squared is the smaller of the errors
/// against the two indistinguishable truths; predicted_rate holds the
/// non-identifiability radius alpha^2 s / (d1 d2) (l1) or alpha^2 s / d2.
/// `worst` (optional) receives, per row, the larger of the two errors.
std::vector<ResultRow> run_badpair_check(const SweepSpec& spec,
                                         std::vector<double>* worst = nullptr);
/// Grid values are dimensions, crossed with the (rank_fracs, sparsity_fracs)
/// settings; predicted_rate is the sparse Gaussian corollary rate.
std::vector<ResultRow> run_rate_band(const SweepSpec& spec);

std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// Orders rows by (grid value, trial), breaking ties on (r, s, d1).
void sort_rows(std::vector<ResultRow>& rows);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Needs two distinct x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Mean of `value(row)` per distinct grid value (ascending).
struct GridMeans {
    std::vector<double> grid;
    std::vector<double> mean;
};
GridMeans grid_means(const std::vector<ResultRow>& rows,
                     double (*value)(const ResultRow&));

double median(std::vector<double> v);

/// Verdict of the --check thresholds of one experiment.
struct CheckOutcome {
    bool pass = false;
    std::string detail;
};

/// rank_sweep: mean e^2 on the grid, R^2 >= 0.9 and slope > 0.
/// sparsity_sweep: same with R^2 >= 0.85.
/// dimension_sweep: per rank, mean 1/e^2 on d with R^2 >= 0.9; for two ranks
///   ra < rb, slope(ra) / slope(rb) within 20% of rb / ra.
/// twostep_compare: median paired ratio two-step / convex in [1/3, 3].
/// twostep_failure: median paired ratio >= 2.
/// badpair_check: every entry of `worst` >= radius / 4 (needs `worst`).
/// rate_band: per (d, r, s) cell the mean of e^2 / predicted_rate; max / min
///   across cells <= 3.
CheckOutcome check_sweep(const SweepSpec& spec, const std::vector<ResultRow>& rows,
                         const std::vector<double>* worst = nullptr);

inline constexpr std::string_view kCsvHeader =
    "experiment,grid_value,trial,seed,d1,d2,r,s,lambda,mu,alpha,e_squared,"
    "predicted_rate,iterations,converged,wall_time_ms";

/// Header plus one line per row, reals at 12 significant digits.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws std::invalid_argument if rows mix experiment ids and
/// std::runtime_error on I/O failure.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_csv(const std::string& path);

/// Per-grid means as whitespace columns "grid mean_e2 mean_inv_e2 count",
/// one gnuplot data block (separated by two blank lines) per rank.
void write_gnuplot(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace nmd
