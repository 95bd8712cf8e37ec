#include "nmd/bench.hpp"
#include "nmd/matcore.hpp"
#include "nmd/obsop.hpp"
#include "nmd/reg.hpp"
#include "nmd/solver.hpp"
#include "nmd/synth.hpp"
#include "nmd/tuning.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>

namespace py = pybind11;
using namespace nmd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RegularizerKind kind_of(const std::string& name) { return parse_regularizer_kind(name); }

NormKind norm_of(const std::string& name) {
    for (NormKind k : {NormKind::frobenius, NormKind::nuclear, NormKind::op,
                       NormKind::elementwise_l1, NormKind::elementwise_linf,
                       NormKind::col_2_1, NormKind::col_2_inf})
        if (to_string(k) == name) return k;
    if (name == "l1") return NormKind::elementwise_l1;
    if (name == "linf") return NormKind::elementwise_linf;
    if (name == "op") return NormKind::op;
    throw std::invalid_argument("unknown norm '" + name + "'");
}

py::dict params_dict(const PenaltyParams& p) {
    py::dict d;
    d["lambda"] = p.lambda;
    d["mu"] = p.mu;
    d["alpha"] = p.alpha;
    return d;
}

py::dict estimate_dict(const DecompositionEstimate& e) {
    py::dict d;
    d["theta_hat"] = e.theta_hat;
    d["gamma_hat"] = e.gamma_hat;
    d["objective_trace"] = e.objective_trace;
    d["iterations"] = e.iterations;
    d["converged"] = e.converged;
    d["feasibility_residual"] = e.feasibility_residual;
    d["fixed_point_residual"] = e.fixed_point_residual;
    d["inexact_prox_calls"] = e.inexact_prox_calls;
    return d;
}

ObservationOperator make_operator(const std::string& name, long d1, long d2,
                                  const std::optional<Matrix>& design) {
    switch (parse_operator_kind(name)) {
        case OperatorKind::identity: return ObservationOperator::identity(d1, d2);
        case OperatorKind::multitask:
            if (!design) throw std::invalid_argument("multitask operator needs a design");
            return ObservationOperator::multitask(*design, d2);
        case OperatorKind::symmetrized_column: return ObservationOperator::symmetrized_column(d1);
    }
    throw std::invalid_argument("unknown operator");
}

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["experiment"] = r.experiment;
    d["grid_value"] = r.grid_value;
    d["trial"] = r.trial;
    d["seed"] = r.seed;
    d["d1"] = r.d1;
    d["d2"] = r.d2;
    d["r"] = r.r;
    d["s"] = r.s;
    d["lambda"] = r.lambda;
    d["mu"] = r.mu;
    d["alpha"] = r.alpha;
    d["e_squared"] = r.e_squared;
    d["predicted_rate"] = r.predicted_rate;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["wall_time_ms"] = r.wall_time_ms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Noisy matrix decomposition: low-rank plus sparse estimation.";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def("svd", [](const Matrix& a) {
        const SvdFactors f = svd(a);
        return py::make_tuple(f.left, f.singular_values, f.right);
    }, py::arg("m"), "Thin SVD, returns (U, sigma, V).");
    m.def("norm", [](const Matrix& a, const std::string& kind) { return norm(a, norm_of(kind)); },
          py::arg("m"), py::arg("kind"));
    m.def("decomposition_error", &decomposition_error, py::arg("theta_hat"), py::arg("gamma_hat"),
          py::arg("theta_star"), py::arg("gamma_star"));

    m.def("reg_value", [](const std::string& k, const Matrix& g) { return reg_value(kind_of(k), g); },
          py::arg("kind"), py::arg("g"));
    m.def("dual_value", [](const std::string& k, const Matrix& g) { return dual_value(kind_of(k), g); },
          py::arg("kind"), py::arg("m"));
    m.def("kappa", [](const std::string& k, long d1, long d2) { return kappa(kind_of(k), d1, d2); },
          py::arg("kind"), py::arg("d1"), py::arg("d2"));
    m.def("prox", [](const std::string& k, const Matrix& a, double t) { return prox(kind_of(k), a, t); },
          py::arg("kind"), py::arg("m"), py::arg("threshold"));
    m.def("spikiness", [](const std::string& k, const Matrix& a) { return spikiness(kind_of(k), a); },
          py::arg("kind"), py::arg("theta"));
    m.def("project_spikiness_ball",
          [](const std::string& k, const Matrix& a, double alpha) {
              return project_spikiness_ball(kind_of(k), a, alpha);
          },
          py::arg("kind"), py::arg("theta"), py::arg("alpha"));
    m.def("svt", &svt, py::arg("m"), py::arg("tau"));

    m.def("solve",
          [](const Matrix& y, double lambda, double mu, double alpha, const std::string& kind,
             const std::string& op, std::optional<Matrix> design, int max_iters, double rel_tol,
             int dykstra_iters, bool backtracking, bool restart) {
              const long d1 = design ? design->cols() : y.rows();
              ProblemInstance inst{y, make_operator(op, d1, y.cols(), design), kind_of(kind),
                                   PenaltyParams{lambda, mu, alpha}, std::nullopt};
              SolverConfig cfg;
              cfg.max_iters = max_iters;
              cfg.rel_tol = rel_tol;
              cfg.dykstra_iters = dykstra_iters;
              cfg.step_rule = backtracking ? StepRule::backtracking : StepRule::fixed_lipschitz;
              cfg.restart = restart;
              DecompositionEstimate est;
              {
                  py::gil_scoped_release release;
                  est = solve_composite(inst, cfg);
              }
              return estimate_dict(est);
          },
          py::arg("y"), py::arg("lambda_"), py::arg("mu"), py::arg("alpha") = kInf,
          py::arg("kind") = "l1", py::arg("operator") = "identity", py::arg("design") = py::none(),
          py::arg("max_iters") = 5000, py::arg("rel_tol") = 1e-7, py::arg("dykstra_iters") = 20,
          py::arg("backtracking") = false, py::arg("restart") = true,
          "Accelerated proximal gradient on the convex program; returns a dict.");
    m.def("two_step",
          [](const Matrix& y, double lambda, double mu) { return estimate_dict(two_step(y, lambda, mu)); },
          py::arg("y"), py::arg("lambda_"), py::arg("mu"));

    m.def("params_sparse_gaussian",
          [](double nu, long d1, long d2, double alpha) {
              return params_dict(params_sparse_gaussian(nu, d1, d2, alpha));
          },
          py::arg("nu"), py::arg("d1"), py::arg("d2"), py::arg("alpha"));
    m.def("params_col_gaussian",
          [](double nu, long d1, long d2, double alpha, bool literal) {
              return params_dict(params_col_gaussian(nu, d1, d2, alpha, literal));
          },
          py::arg("nu"), py::arg("d1"), py::arg("d2"), py::arg("alpha"),
          py::arg("paper_literal") = false);
    m.def("params_multitask",
          [](double nu, const Matrix& design, long n, long d2, double alpha) {
              return params_dict(params_multitask(nu, design_stats(design, n), n, design.cols(), d2, alpha));
          },
          py::arg("nu"), py::arg("design"), py::arg("n"), py::arg("d2"), py::arg("alpha"));
    m.def("corollary_rate_sparse_gaussian",
          [](long d1, long d2, long r, long s, double alpha, double nu) {
              RateInputs in;
              in.d1 = d1;
              in.d2 = d2;
              in.r = r;
              in.s = s;
              in.alpha = alpha;
              in.nu = nu;
              return corollary_rate(RateKind::sparse_gaussian, in);
          },
          py::arg("d1"), py::arg("d2"), py::arg("r"), py::arg("s"), py::arg("alpha"), py::arg("nu"));

    m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("index"));
    m.def("gen_low_rank",
          [](long d1, long d2, long r, double alpha, const std::string& k, std::uint64_t seed) {
              return gen_low_rank(d1, d2, r, alpha, kind_of(k), seed);
          },
          py::arg("d1"), py::arg("d2"), py::arg("r"), py::arg("alpha"), py::arg("kind"),
          py::arg("seed"));
    m.def("gen_sparse",
          [](long d1, long d2, long s, const std::string& k, double magnitude, std::uint64_t seed) {
              const SparseDraw g = gen_sparse(d1, d2, s, kind_of(k), magnitude, seed);
              py::list support;
              if (g.support.kind() == RegularizerKind::elementwise_l1)
                  for (const auto& [i, j] : g.support.entry_list()) support.append(py::make_tuple(i, j));
              else
                  for (auto j : g.support.column_list()) support.append(j);
              return py::make_tuple(g.matrix, support);
          },
          py::arg("d1"), py::arg("d2"), py::arg("s"), py::arg("kind"), py::arg("magnitude"),
          py::arg("seed"));
    m.def("gen_gaussian_noise", &gen_gaussian_noise, py::arg("d1"), py::arg("d2"), py::arg("nu"),
          py::arg("seed"));
    m.def("gen_wishart_noise", &gen_wishart_noise, py::arg("sigma"), py::arg("n"), py::arg("seed"));
    m.def("bad_pair",
          [](const std::string& k, long d1, long d2, long s, double alpha) {
              const GroundTruth gt = bad_pair(kind_of(k), d1, d2, s, alpha);
              return py::make_tuple(gt.theta_star, gt.gamma_star);
          },
          py::arg("kind"), py::arg("d1"), py::arg("d2"), py::arg("s"), py::arg("alpha"));
    m.def("gen_twostep_failure_design", &gen_twostep_failure_design, py::arg("d"));

    m.def("run_sweep",
          [](const std::string& experiment, std::optional<std::vector<double>> grid,
             std::optional<int> trials, std::uint64_t base_seed, std::optional<long> d,
             std::optional<long> r, std::optional<long> s, std::optional<double> alpha) {
              SweepSpec spec = default_spec(parse_experiment(experiment));
              if (grid) spec.grid = *grid;
              if (trials) spec.trials = *trials;
              spec.base_seed = base_seed;
              if (d) spec.d = *d;
              if (r) spec.r = *r;
              if (s) spec.s = *s;
              if (alpha) spec.alpha = *alpha;
              std::vector<double> worst;
              std::vector<ResultRow> rows;
              {
                  py::gil_scoped_release release;
                  rows = spec.experiment == Experiment::badpair_check
                             ? run_badpair_check(spec, &worst)
                             : run_sweep(spec);
              }
              const CheckOutcome check = check_sweep(spec, rows, worst.empty() ? nullptr : &worst);
              py::list out;
              for (const auto& row : rows) out.append(row_dict(row));
              return py::make_tuple(out, check.pass, check.detail);
          },
          py::arg("experiment"), py::arg("grid") = py::none(), py::arg("trials") = py::none(),
          py::arg("base_seed") = 1, py::arg("d") = py::none(), py::arg("r") = py::none(),
          py::arg("s") = py::none(), py::arg("alpha") = py::none(),
          "Runs one experiment with its defaults overridden; returns (rows, passed, detail).");
}
