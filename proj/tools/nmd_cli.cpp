// nmd: generate instances, solve them, and run the experiment sweeps.
//
// Exit status: 0 on success, 1 on any fatal error, 2 when --check is given
// and the experiment misses its threshold.

#include "nmd/bench.hpp"
#include "nmd/records.hpp"
#include "nmd/solver.hpp"
#include "nmd/synth.hpp"
#include "nmd/tuning.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nmd;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitCheckFailed = 2;

const std::vector<std::string> kOperatorNames{"identity", "multitask", "symcol"};
const std::vector<std::string> kKindNames{"l1", "col21"};

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    bool check = false;
};

struct GenArgs {
    long d1 = 100, d2 = 100, r = 10, s = 100;
    double alpha = 5.0, nu = 1.0, magnitude = 1.0;
    std::string kind = "l1";
    std::string op = "identity";
    std::string design;
};

// Weights given directly or through a named rule.
struct TuneArgs {
    std::string rule;
    double lambda = -1.0, mu = -1.0;
    double alpha = std::numeric_limits<double>::infinity();
    double nu = 1.0;
    long s = 0;
    long n = 1;
    long r = 1;
    double theta_opnorm = 1.0;
    bool paper_literal = false;
};

struct SolveArgs {
    std::string y, design, truth;
    std::string kind = "l1";
    std::string op = "identity";
    TuneArgs tune;
    SolverConfig cfg;
    bool backtracking = false;
    bool no_restart = false;
};

struct SweepArgs {
    std::vector<double> grid;
    std::optional<int> trials;
    std::optional<long> d, r, s;
    std::optional<double> alpha, nu, magnitude;
    std::optional<std::string> kind;
    std::vector<long> ranks;
    bool paper_literal = false;
    bool timing = false;
    SolverConfig cfg;
};

void add_tune_options(CLI::App* sub, TuneArgs& t) {
    sub->add_option("--rule", t.rule,
                    "Tuning rule: sparse_gaussian, sparse_refined, col_gaussian, "
                    "multitask, factor, robust_cov")
        ->check(CLI::IsMember({"sparse_gaussian", "sparse_refined", "col_gaussian",
                               "multitask", "factor", "robust_cov"}));
    sub->add_option("--lambda", t.lambda, "Nuclear norm weight (overrides the rule)");
    sub->add_option("--mu", t.mu, "Sparse regularizer weight (overrides the rule)");
    sub->add_option("--alpha", t.alpha, "Spikiness radius (inf disables)");
    sub->add_option("--nu", t.nu, "Noise level used by the rule")->capture_default_str();
    sub->add_option("--rule-s", t.s, "Sparsity s for sparse_refined");
    sub->add_option("--samples", t.n, "Sample size n for multitask/factor/robust_cov")
        ->capture_default_str();
    sub->add_option("--rule-r", t.r, "Rank r for robust_cov")->capture_default_str();
    sub->add_option("--theta-opnorm", t.theta_opnorm, "||theta*||_op for robust_cov")
        ->capture_default_str();
    sub->add_flag("--paper-literal", t.paper_literal,
                  "col_gaussian: drop the nu factor of the log term");
}

void add_solver_options(CLI::App* sub, SolverConfig& cfg) {
    sub->add_option("--max-iters", cfg.max_iters)->capture_default_str();
    sub->add_option("--tol", cfg.rel_tol, "Relative objective tolerance")
        ->capture_default_str();
    sub->add_option("--dykstra-iters", cfg.dykstra_iters)->capture_default_str();
    sub->add_option("--dykstra-tol", cfg.dykstra_tol)->capture_default_str();
}

ObservationOperator make_operator(OperatorKind op, const std::string& design_path,
                                  long d1, long d2) {
    switch (op) {
        case OperatorKind::identity: return ObservationOperator::identity(d1, d2);
        case OperatorKind::symmetrized_column:
            if (d1 != d2) throw std::invalid_argument("symcol needs square matrices");
            return ObservationOperator::symmetrized_column(d1);
        case OperatorKind::multitask:
            if (design_path.empty())
                throw std::invalid_argument("multitask needs --design");
            return ObservationOperator::multitask(load_matrix(design_path), d2);
    }
    throw std::invalid_argument("unknown operator");
}

PenaltyParams resolve_params(const TuneArgs& t, const ObservationOperator& op,
                             const Matrix& y) {
    PenaltyParams p;
    p.alpha = t.alpha;
    const long d1 = op.in_rows();
    const long d2 = op.in_cols();
    if (!t.rule.empty()) {
        if (std::isinf(t.alpha))
            throw std::invalid_argument("tuning rules need a finite --alpha");
        std::string warning;
        if (t.rule == "sparse_gaussian") {
            p = params_sparse_gaussian(t.nu, d1, d2, t.alpha);
        } else if (t.rule == "sparse_refined") {
            p = params_sparse_refined(t.nu, d1, d2, t.s, t.alpha);
        } else if (t.rule == "col_gaussian") {
            p = params_col_gaussian(t.nu, d1, d2, t.alpha, t.paper_literal);
        } else if (t.rule == "multitask") {
            p = params_multitask(t.nu, design_stats(op.design(), t.n), t.n, d1, d2,
                                 t.alpha);
        } else if (t.rule == "factor") {
            p = params_factor(y, t.n, d1, t.alpha, &warning);
        } else if (t.rule == "robust_cov") {
            p = params_robust_cov(t.theta_opnorm, t.r, t.n, d1, t.alpha, &warning);
        }
        if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
    }
    if (t.lambda >= 0.0) p.lambda = t.lambda;
    if (t.mu >= 0.0) p.mu = t.mu;
    if (t.rule.empty() && (t.lambda < 0.0 || t.mu < 0.0))
        throw std::invalid_argument("give --rule or both --lambda and --mu");
    p.validate();
    return p;
}

fs::path output_dir(const Common& c) {
    fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    fs::create_directories(dir);
    return dir;
}

int run_gen(const Common& c, const GenArgs& g) {
    const fs::path dir = output_dir(c);
    const RegularizerKind kind = parse_regularizer_kind(g.kind);
    const OperatorKind op_kind = parse_operator_kind(g.op);
    const ObservationOperator op = make_operator(op_kind, g.design, g.d1, g.d2);
    const Matrix theta = gen_low_rank(g.d1, g.d2, g.r, g.alpha, kind, derive_seed(c.seed, 0));
    const SparseDraw sparse = gen_sparse(g.d1, g.d2, g.s, kind, g.magnitude, derive_seed(c.seed, 1));
    const Matrix noise =
        gen_gaussian_noise(op.out_rows(), op.out_cols(), g.nu, derive_seed(c.seed, 2));
    save_matrix((dir / "theta_star.txt").string(), theta);
    save_matrix((dir / "gamma_star.txt").string(), sparse.matrix);
    save_matrix((dir / "y.txt").string(), op.apply(theta, sparse.matrix) + noise);
    write_support_csv((dir / "support.csv").string(), sparse.support);
    InstanceManifest m;
    m.d1 = g.d1;
    m.d2 = g.d2;
    m.r = g.r;
    m.s = g.s;
    m.alpha = g.alpha;
    m.nu = g.nu;
    m.magnitude = g.magnitude;
    m.seed = c.seed;
    m.kind = kind;
    m.op = op_kind;
    m.theta_frobenius = theta.norm();
    write_key_values((dir / "manifest.txt").string(), m.to_key_values());
    std::cout << "wrote instance to " << dir.string() << '\n';
    return 0;
}

void report_truth(const std::string& truth_dir, const DecompositionEstimate& est,
                  KeyValues& diag) {
    if (truth_dir.empty()) return;
    const Matrix theta = load_matrix((fs::path(truth_dir) / "theta_star.txt").string());
    const Matrix gamma = load_matrix((fs::path(truth_dir) / "gamma_star.txt").string());
    const double e2 = decomposition_error(est.theta_hat, est.gamma_hat, theta, gamma);
    diag["e_squared"] = format_real(e2);
    std::cout << "e_squared=" << format_real(e2) << '\n';
}

int run_solve(const Common& c, SolveArgs& a, bool split) {
    const Matrix y = load_matrix(a.y);
    Eigen::Index d1 = y.rows(), d2 = y.cols();
    const OperatorKind op_kind = parse_operator_kind(a.op);
    if (op_kind == OperatorKind::multitask) {
        if (a.design.empty()) throw std::invalid_argument("multitask needs --design");
        d1 = load_matrix(a.design).cols();
    }
    const ObservationOperator op = make_operator(op_kind, a.design, d1, d2);
    const PenaltyParams p = resolve_params(a.tune, op, y);
    ProblemInstance inst{y, op, parse_regularizer_kind(a.kind), p, std::nullopt};
    if (a.backtracking) a.cfg.step_rule = StepRule::backtracking;
    a.cfg.restart = !a.no_restart;
    const DecompositionEstimate est = split ? two_step(inst) : solve_composite(inst, a.cfg);

    const fs::path dir = output_dir(c);
    save_matrix((dir / "theta_hat.txt").string(), est.theta_hat);
    save_matrix((dir / "gamma_hat.txt").string(), est.gamma_hat);
    KeyValues diag = diagnostics(est, p);
    diag["method"] = split ? "two_step" : "convex";
    report_truth(a.truth, est, diag);
    write_key_values((dir / "diagnostics.txt").string(), diag);
    std::cout << "lambda=" << format_real(p.lambda) << " mu=" << format_real(p.mu)
              << " iterations=" << est.iterations << " converged=" << est.converged
              << " objective=" << format_real(est.final_objective()) << '\n';
    return 0;
}

int run_experiment(const Common& c, Experiment e, const SweepArgs& a) {
    SweepSpec spec = default_spec(e);
    spec.base_seed = c.seed;
    spec.output_path = c.out;
    if (!a.grid.empty()) spec.grid = a.grid;
    if (a.trials) spec.trials = *a.trials;
    if (a.d) spec.d = *a.d;
    if (a.r) spec.r = *a.r;
    if (a.s) spec.s = *a.s;
    if (a.alpha) spec.alpha = *a.alpha;
    if (a.nu) spec.noise = *a.nu > 0.0 ? NoiseModel{GaussianNoise{*a.nu}} : NoiseModel{NoNoise{}};
    if (a.magnitude) spec.magnitude = *a.magnitude;
    if (a.kind) spec.kind = parse_regularizer_kind(*a.kind);
    if (!a.ranks.empty()) spec.ranks = a.ranks;
    spec.paper_literal = a.paper_literal;
    spec.timing = a.timing;
    spec.solver = a.cfg;

    std::vector<double> worst;
    const std::vector<ResultRow> rows = e == Experiment::badpair_check
                                            ? run_badpair_check(spec, &worst)
                                            : run_sweep(spec);
    if (c.out.empty()) {
        write_csv(std::cout, rows);
    } else {
        emit_csv(rows, c.out);
        std::ofstream dat(c.out + ".dat");
        write_gnuplot(dat, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << c.out << '\n';
    }
    const CheckOutcome verdict = check_sweep(spec, rows, &worst);
    std::cerr << to_string(e) << ": " << (verdict.pass ? "PASS" : "FAIL") << " "
              << verdict.detail << '\n';
    if (c.check && !verdict.pass) return kExitCheckFailed;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy matrix decomposition: generators, convex solver and sweeps"};
    app.set_config("--config", "", "INI file of flag=value lines mirroring the flags");
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--seed", common.seed, "Base seed")->capture_default_str();
    app.add_option("--out", common.out, "Output directory (gen/solve) or CSV path (sweeps)");
    app.add_flag("--check", common.check, "Exit with status 2 if the threshold fails");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic instance");
    gen_cmd->add_option("--d1", gen.d1)->capture_default_str();
    gen_cmd->add_option("--d2", gen.d2)->capture_default_str();
    gen_cmd->add_option("--rank", gen.r)->capture_default_str();
    gen_cmd->add_option("--sparsity", gen.s)->capture_default_str();
    gen_cmd->add_option("--alpha", gen.alpha)->capture_default_str();
    gen_cmd->add_option("--nu", gen.nu)->capture_default_str();
    gen_cmd->add_option("--magnitude", gen.magnitude)->capture_default_str();
    gen_cmd->add_option("--kind", gen.kind)->check(CLI::IsMember(kKindNames))->capture_default_str();
    gen_cmd->add_option("--operator", gen.op)->check(CLI::IsMember(kOperatorNames))->capture_default_str();
    gen_cmd->add_option("--design", gen.design, "Design matrix file (multitask)");

    SolveArgs solve;
    SolveArgs split;
    CLI::App* solve_cmds[2] = {
        app.add_subcommand("solve", "Solve the convex program"),
        app.add_subcommand("twostep", "Soft threshold then singular value threshold")};
    SolveArgs* solve_args[2] = {&solve, &split};
    for (int k = 0; k < 2; ++k) {
        auto* sub = solve_cmds[k];
        SolveArgs& a = *solve_args[k];
        sub->add_option("--y", a.y, "Observation matrix file")->required();
        sub->add_option("--design", a.design, "Design matrix file (multitask)");
        sub->add_option("--truth", a.truth, "Directory with theta_star.txt and gamma_star.txt");
        sub->add_option("--kind", a.kind)->check(CLI::IsMember(kKindNames))->capture_default_str();
        sub->add_option("--operator", a.op)->check(CLI::IsMember(kOperatorNames))->capture_default_str();
        add_tune_options(sub, a.tune);
        add_solver_options(sub, a.cfg);
        sub->add_flag("--backtracking", a.backtracking, "Backtracking step size");
        sub->add_flag("--no-restart", a.no_restart, "Disable the momentum restart");
    }

    const std::vector<std::pair<std::string, Experiment>> verbs{
        {"sweep-rank", Experiment::rank_sweep},
        {"sweep-sparsity", Experiment::sparsity_sweep},
        {"sweep-dim", Experiment::dimension_sweep},
        {"compare-twostep", Experiment::twostep_compare},
        {"fail-twostep", Experiment::twostep_failure},
        {"badpair", Experiment::badpair_check},
        {"rate-band", Experiment::rate_band}};
    std::vector<SweepArgs> sweep_args(verbs.size());
    std::vector<CLI::App*> sweep_cmds;
    for (std::size_t k = 0; k < verbs.size(); ++k) {
        auto* sub = app.add_subcommand(verbs[k].first,
                                       "Run the " + std::string(to_string(verbs[k].second)) +
                                           " experiment");
        SweepArgs& a = sweep_args[k];
        sub->add_option("--grid", a.grid, "Grid values")->delimiter(',');
        sub->add_option("--trials", a.trials);
        sub->add_option("--d", a.d, "Matrix dimension");
        sub->add_option("--rank", a.r);
        sub->add_option("--sparsity", a.s);
        sub->add_option("--alpha", a.alpha);
        sub->add_option("--nu", a.nu);
        sub->add_option("--magnitude", a.magnitude);
        sub->add_option("--kind", a.kind)->check(CLI::IsMember(kKindNames));
        sub->add_option("--ranks", a.ranks, "Ranks (dimension sweep)")->delimiter(',');
        sub->add_flag("--paper-literal", a.paper_literal);
        sub->add_flag("--timing", a.timing, "Record wall times");
        add_solver_options(sub, a.cfg);
        sweep_cmds.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitFatal;
    }

    try {
        if (*gen_cmd) return run_gen(common, gen);
        if (*solve_cmds[0]) return run_solve(common, solve, false);
        if (*solve_cmds[1]) return run_solve(common, split, true);
        for (std::size_t k = 0; k < verbs.size(); ++k)
            if (*sweep_cmds[k]) return run_experiment(common, verbs[k].second, sweep_args[k]);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFatal;
    }
    return kExitFatal;
}
