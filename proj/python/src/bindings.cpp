#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "portfolio_cam/disruption.hpp"
#include "portfolio_cam/optimizer.hpp"
#include "portfolio_cam/scenario_file.hpp"
#include "portfolio_cam/sim.hpp"

namespace py = pybind11;
using namespace pcam;

namespace {

PortfolioInputs make_inputs(const std::vector<CameraSpec>& cameras, const Eigen::MatrixXd& rho, double theta,
                            double psi) {
    return build_portfolio_inputs(cameras, CorrelationMatrix(rho), theta, psi);
}

py::dict stats_dict(const RunStats& r) {
    py::dict d;
    d["strategy"] = std::string(to_string(r.strategy));
    d["psi"] = r.psi;
    d["mean_quality"] = r.mean_quality;
    d["std_quality"] = r.std_quality;
    d["reliability"] = r.reliability;
    d["rel_ci_lo"] = r.ci95_reliability.first;
    d["rel_ci_hi"] = r.ci95_reliability.second;
    d["epochs"] = r.epochs_total;
    d["successes"] = r.successes;
    d["tau"] = r.tau;
    d["mean_objective"] = r.mean_objective;
    return d;
}

}  // namespace

PYBIND11_MODULE(_portfolio_cam, m) {
    m.doc() = "Portfolio-theoretic camera selection under correlated disruptions";

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

    py::class_<AvailabilityDist>(m, "AvailabilityDist")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
        .def_property_readonly("a", &AvailabilityDist::alpha_shape)
        .def_property_readonly("b", &AvailabilityDist::beta_shape)
        .def("mean", &AvailabilityDist::mean)
        .def("std_dev", &AvailabilityDist::std_dev)
        .def("__repr__", [](const AvailabilityDist& d) {
            return "AvailabilityDist(" + std::to_string(d.alpha_shape()) + ", " + std::to_string(d.beta_shape()) + ")";
        });

    py::class_<CameraSpec>(m, "CameraSpec")
        .def(py::init([](int id, double resolution, AvailabilityDist avail) {
                 return CameraSpec{id, resolution, avail};
             }),
             py::arg("id"), py::arg("resolution"), py::arg("avail") = AvailabilityDist{})
        .def_readwrite("id", &CameraSpec::id)
        .def_readwrite("resolution", &CameraSpec::resolution)
        .def_readwrite("avail", &CameraSpec::avail);

    py::class_<PortfolioInputs>(m, "PortfolioInputs")
        .def(py::init([](Eigen::VectorXd e, Eigen::MatrixXd cov, double theta, double psi) {
                 return PortfolioInputs{std::move(e), std::move(cov), theta, psi};
             }),
             py::arg("expected_res"), py::arg("cov"), py::arg("theta"), py::arg("psi"))
        .def_readwrite("expected_res", &PortfolioInputs::expected_res)
        .def_readwrite("cov", &PortfolioInputs::cov)
        .def_readwrite("theta", &PortfolioInputs::theta)
        .def_readwrite("psi", &PortfolioInputs::psi);

    py::class_<GaConfig>(m, "GaConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &GaConfig::population_size)
        .def_readwrite("max_generations", &GaConfig::max_generations)
        .def_readwrite("crossover_rate", &GaConfig::crossover_rate)
        .def_readwrite("mutation_rate", &GaConfig::mutation_rate)
        .def_readwrite("mutation_scale", &GaConfig::mutation_scale)
        .def_readwrite("elite_count", &GaConfig::elite_count)
        .def_readwrite("penalty_weight", &GaConfig::penalty_weight)
        .def_readwrite("rng_seed", &GaConfig::rng_seed);

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("alpha", [](const Solution& s) { return s.selection.alpha(); })
        .def_readonly("objective", &Solution::objective)
        .def_readonly("quality", &Solution::quality)
        .def_readonly("budget", &Solution::budget)
        .def_readonly("feasible", &Solution::feasible)
        .def_readonly("evaluations", &Solution::evaluations)
        .def_readonly("diagnostics", &Solution::diagnostics)
        .def_readonly("best_fitness_history", &Solution::best_fitness_history)
        .def_property_readonly("solver", [](const Solution& s) { return std::string(to_string(s.solver)); });

    m.def("beta_mean", &beta_mean);
    m.def("beta_std", &beta_std);
    m.def("build_portfolio_inputs", &make_inputs, py::arg("cameras"), py::arg("rho"), py::arg("theta"),
          py::arg("psi"));
    m.def("objective_value", &objective_value, py::arg("inputs"), py::arg("alpha"));
    m.def("quality_value", &quality_value, py::arg("inputs"), py::arg("alpha"));
    m.def("constraint_violation", &constraint_violation, py::arg("inputs"), py::arg("alpha"));
    m.def("is_feasible", &is_feasible, py::arg("inputs"), py::arg("alpha"));
    m.def("ga_solve", &ga_solve, py::arg("inputs"), py::arg("config") = GaConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("grid_oracle_solve", &grid_oracle_solve, py::arg("inputs"), py::arg("steps_per_axis"),
          py::call_guard<py::gil_scoped_release>());
    m.def("baseline_top_expected", &baseline_top_expected, py::arg("inputs"));
    m.def("uniform_random_baseline", &uniform_random_baseline, py::arg("inputs"), py::arg("seed"));
    m.def("factor_correlation", py::overload_cast<const Eigen::MatrixXd&>(&factor_correlation), py::arg("rho"));

    m.def(
        "sample_availability",
        [](const std::vector<CameraSpec>& cameras, const Eigen::MatrixXd& rho, double phi, std::uint64_t seed,
           std::size_t epochs) {
            std::vector<AvailabilityDist> marginals;
            for (const auto& c : cameras) marginals.push_back(c.avail);
            const DisruptionProcessConfig cfg(CorrelationMatrix(rho), phi, marginals, seed);
            DisruptionProcess process(cfg, seed);
            Eigen::MatrixXd p(epochs, cameras.size());
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> up(epochs, cameras.size());
            for (std::size_t t = 0; t < epochs; ++t) {
                process.advance();
                const auto o = process.realize(cameras);
                p.row(static_cast<Eigen::Index>(t)) = o.p.transpose();
                for (std::size_t i = 0; i < cameras.size(); ++i) up(t, i) = o.up[i];
            }
            return py::make_tuple(p, up);
        },
        py::arg("cameras"), py::arg("rho"), py::arg("temporal_phi") = 0.0, py::arg("seed") = 0,
        py::arg("epochs") = 1000, "Realized availability probabilities and up flags, one row per epoch.");

    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("cameras", [](const Scenario& s) { return s.config.cameras; })
        .def_property_readonly("rho", [](const Scenario& s) { return s.config.disruption.spatial_rho().matrix(); })
        .def_property_readonly("psi_values", [](const Scenario& s) { return s.config.psi_values; })
        .def_property(
            "epochs", [](const Scenario& s) { return s.config.epochs; },
            [](Scenario& s, std::size_t v) { s.config.epochs = v; })
        .def_property(
            "replications", [](const Scenario& s) { return s.config.replications; },
            [](Scenario& s, std::size_t v) { s.config.replications = v; })
        .def_property(
            "master_seed", [](const Scenario& s) { return s.config.master_seed; },
            [](Scenario& s, std::uint64_t v) { s.config.master_seed = v; })
        .def("portfolio_inputs", [](const Scenario& s, double psi) { return s.config.portfolio_inputs(psi); })
        .def("tau", [](const Scenario& s, double psi) { return s.config.tau(psi); })
        .def("to_text", &write_scenario);

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("origin") = "<scenario>");
    m.def(
        "compare_strategies",
        [](const Scenario& s) {
            ComparisonTable table;
            {
                py::gil_scoped_release release;
                table = compare_strategies(s.config);
            }
            py::list rows;
            for (const auto& r : table.rows) rows.append(stats_dict(r));
            return rows;
        },
        py::arg("scenario"), "One dict per (psi, strategy), ordered by psi then strategy name.");
}
