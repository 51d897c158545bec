#include "equistop/analytic_gbm.hpp"
#include "equistop/cli.hpp"
#include "equistop/fixed_point.hpp"
#include "equistop/mc_oracle.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace equistop;

namespace {

gbm::PutGbmProblem make_problem(double strike, double discount, std::pair<double, double> sigma_band,
                                double alpha, std::optional<std::pair<double, double>> rate_band,
                                std::optional<std::pair<double, double>> drift_band) {
    gbm::PutGbmProblem p{};
    p.strike = strike;
    p.discount = discount;
    p.sigma_band = {sigma_band.first, sigma_band.second};
    p.alpha = alpha;
    if (rate_band) p.rate_band = gbm::Band{rate_band->first, rate_band->second};
    if (drift_band) p.drift_band = gbm::Band{drift_band->first, drift_band->second};
    p.validate();
    return p;
}

// Python-side handle for the immutable shared grid.
struct Grid {
    GridPtr ptr;
};

}  // namespace

PYBIND11_MODULE(_equistop, m) {
    m.doc() = "Equilibrium stopping under alpha-maxmin volatility ambiguity";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
    py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

    py::class_<gbm::PutGbmProblem>(m, "PutGbmProblem")
        .def(py::init(&make_problem), py::arg("strike"), py::arg("discount"), py::arg("sigma_band"),
             py::arg("alpha"), py::arg("rate_band") = py::none(), py::arg("drift_band") = py::none())
        .def_readonly("strike", &gbm::PutGbmProblem::strike)
        .def_readonly("discount", &gbm::PutGbmProblem::discount)
        .def_readonly("alpha", &gbm::PutGbmProblem::alpha)
        .def_property_readonly("sigma_band", [](const gbm::PutGbmProblem& p) {
            return std::pair{p.sigma_band.low, p.sigma_band.high};
        })
        .def("objective", &gbm::PutGbmProblem::objective)
        .def("priors", &gbm::PutGbmProblem::priors, py::arg("samples") = 17);

    py::class_<Objective>(m, "Objective")
        .def_static("put", &Objective::put, py::arg("discount"), py::arg("alpha"), py::arg("strike"))
        .def_property_readonly("discount", &Objective::discount)
        .def_property_readonly("alpha", &Objective::alpha)
        .def("payoff", &Objective::payoff);

    py::class_<PriorFamily>(m, "PriorFamily")
        .def_static(
            "gbm_vol_band",
            [](double discount, std::pair<double, double> sigma, int samples) {
                return PriorFamily::gbm_vol_band(discount, {sigma.first, sigma.second}, samples);
            },
            py::arg("discount"), py::arg("sigma_band"), py::arg("samples") = 17)
        .def_property_readonly("dimension", &PriorFamily::dimension)
        .def("sample_grid", &PriorFamily::sample_grid);

    py::class_<Grid>(m, "StateGrid")
        .def_property_readonly("points", [](const Grid& g) {
            return std::vector<double>(g.ptr->points().begin(), g.ptr->points().end());
        })
        .def_property_readonly("spacing", [](const Grid& g) { return g.ptr->spacing(); })
        .def("__len__", [](const Grid& g) { return g.ptr->size(); });
    m.def(
        "build_grid",
        [](int n_points, std::pair<double, double> truncation) {
            return Grid{build_grid(StateInterval::positive_half_line(), n_points, truncation)};
        },
        py::arg("n_points"), py::arg("truncation"), "Uniform grid over a truncation of (0, inf).");

    py::class_<GridPolicy>(m, "GridPolicy")
        .def(py::init([](const Grid& g, std::vector<bool> mask) { return GridPolicy(g.ptr, std::move(mask)); }),
             py::arg("grid"), py::arg("mask"))
        .def_static("empty", [](const Grid& g) { return GridPolicy::empty(g.ptr); })
        .def_static("full", [](const Grid& g) { return GridPolicy::full(g.ptr); })
        .def_static(
            "lower_set", [](const Grid& g, double a) { return GridPolicy::lower_set(g.ptr, a); },
            py::arg("grid"), py::arg("a"))
        .def_property_readonly("grid", [](const GridPolicy& p) { return Grid{p.grid_ptr()}; })
        .def_property_readonly("mask", &GridPolicy::mask)
        .def_property_readonly("threshold", &GridPolicy::lower_threshold)
        .def("count", &GridPolicy::count)
        .def("includes", &GridPolicy::includes)
        .def("contains_state", &GridPolicy::contains_state)
        .def("__eq__", [](const GridPolicy& a, const GridPolicy& b) { return a == b; });

    m.def("exponents", [](const gbm::PutGbmProblem& p) {
        const auto e = gbm::exponents(p);
        return std::pair{e.m1, e.m2};
    });
    m.def("a_star", &gbm::a_star);
    m.def("lambda_value", &gbm::lambda_value, py::arg("x"), py::arg("a"), py::arg("problem"));
    m.def("crossing_point", &gbm::crossing_point, py::arg("a"), py::arg("problem"));
    m.def("is_equilibrium_threshold", [](double a, const gbm::PutGbmProblem& p) {
        return gbm::classify_policy(a, p) == gbm::PolicyClass::equilibrium;
    });
    m.def("value_of_equilibrium", &gbm::value_of_equilibrium, py::arg("x"), py::arg("a"), py::arg("problem"));
    m.def("discounted_hitting_factor", &gbm::discounted_hitting_factor, py::arg("x"), py::arg("a"),
          py::arg("r"), py::arg("sigma"));
    m.def(
        "snapped_threshold_policy",
        [](const Grid& g, double a) { return gbm::snapped_threshold_policy(g.ptr, a); }, py::arg("grid"),
        py::arg("a"));

    py::class_<ValueProfile>(m, "ValueProfile")
        .def_readonly("inf_value", &ValueProfile::inf_value)
        .def_readonly("sup_value", &ValueProfile::sup_value)
        .def_readonly("value", &ValueProfile::value);
    m.def(
        "alpha_maxmin_value",
        [](const GridPolicy& policy, const Objective& objective, const PriorFamily& priors, int n_nodes,
           int threads) {
            ValueEngineConfig cfg;
            cfg.n_nodes = n_nodes;
            cfg.threads = threads;
            py::gil_scoped_release release;
            return alpha_maxmin_value(policy, objective, priors, cfg);
        },
        py::arg("policy"), py::arg("objective"), py::arg("priors"), py::arg("n_nodes") = 4000,
        py::arg("threads") = 0);

    m.def(
        "theta",
        [](const GridPolicy& policy, const Objective& objective, const PriorFamily& priors) {
            py::gil_scoped_release release;
            return theta(policy, objective, priors);
        },
        py::arg("policy"), py::arg("objective"), py::arg("priors"));
    m.def(
        "iterate_to_equilibrium",
        [](const GridPolicy& seed, const Objective& objective, const PriorFamily& priors, int max_iter) {
            IterationTrace trace;
            {
                py::gil_scoped_release release;
                trace = iterate_to_equilibrium(seed, objective, priors, max_iter);
            }
            return py::make_tuple(trace.final_policy(), trace.policies.size() - 1,
                                  std::vector<std::size_t>(trace.added));
        },
        py::arg("seed"), py::arg("objective"), py::arg("priors"), py::arg("max_iter"),
        "Returns (final policy, number of Theta applications, points added per step).");
    m.def(
        "is_equilibrium",
        [](const GridPolicy& policy, const Objective& objective, const PriorFamily& priors) {
            EquilibriumCheck check;
            {
                py::gil_scoped_release release;
                check = is_equilibrium(policy, objective, priors);
            }
            std::vector<double> witnesses;
            for (const auto& v : check.violations) witnesses.push_back(v.x);
            return py::make_tuple(check.equilibrium, witnesses);
        },
        py::arg("policy"), py::arg("objective"), py::arg("priors"));
    m.def(
        "compare_equilibria",
        [](const GridPolicy& a, const GridPolicy& b, const Objective& objective, const PriorFamily& priors) {
            DominanceReport rep;
            {
                py::gil_scoped_release release;
                rep = compare_equilibria(a, b, objective, priors);
            }
            return py::make_tuple(std::string(to_string(rep.verdict)), rep.gap, rep.max_violation);
        },
        py::arg("policy_a"), py::arg("policy_b"), py::arg("objective"), py::arg("priors"));

    py::class_<HittingEstimate>(m, "HittingEstimate")
        .def_readonly("mean", &HittingEstimate::mean)
        .def_readonly("std_error", &HittingEstimate::std_error)
        .def_readonly("n_absorbed", &HittingEstimate::n_absorbed)
        .def_readonly("n_censored", &HittingEstimate::n_censored);
    m.def(
        "estimate_put_hitting_value",
        [](double x, double a, double sigma, const gbm::PutGbmProblem& p, std::int64_t n_paths, double dt,
           std::uint64_t rng_seed, int threads) {
            const Objective obj = p.objective();
            SimConfig cfg = SimConfig::for_objective(obj);
            cfg.n_paths = n_paths;
            cfg.dt = dt;
            cfg.rng_seed = rng_seed;
            cfg.threads = threads;
            const auto priors = PriorFamily::gbm_vol_band(p.discount, {sigma, sigma}, 1);
            py::gil_scoped_release release;
            return estimate_hitting_value(x, gbm::threshold_policy(a), priors, {sigma}, obj, cfg);
        },
        py::arg("x"), py::arg("a"), py::arg("sigma"), py::arg("problem"), py::arg("n_paths") = 10000,
        py::arg("dt") = 1e-3, py::arg("rng_seed") = 20190901, py::arg("threads") = 0,
        "Monte Carlo estimate of E[exp(-r T_a) (K - a)] for one volatility.");

    m.def(
        "run_cli",
        [](const std::string& mode, const std::filesystem::path& config,
           std::optional<std::filesystem::path> out_dir, int threads) {
            const auto parsed = cli::parse_mode(mode);
            if (!parsed) throw InvalidInput("unknown mode '" + mode + "'");
            cli::RunOptions opt;
            opt.threads = threads;
            opt.out_dir = std::move(out_dir);
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(*parsed, config, opt, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("mode"), py::arg("config"), py::arg("out_dir") = py::none(), py::arg("threads") = 0,
        "Runs one CLI mode; returns (exit code, stdout text, stderr text).");
}
