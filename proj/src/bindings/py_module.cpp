#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "clustersync/analysis.hpp"
#include "clustersync/care.hpp"
#include "clustersync/scenario.hpp"
#include "clustersync/scenario_library.hpp"
#include "clustersync/sim.hpp"

namespace py = pybind11;
using namespace clustersync;

namespace {

std::string verdict_name(AuditVerdict v) {
    switch (v) {
        case AuditVerdict::certified: return "certified";
        case AuditVerdict::uncertified: return "uncertified";
        case AuditVerdict::necessarily_fails: return "necessarily-fails";
    }
    return "?";
}

}  // namespace

PYBIND11_MODULE(_clustersync, m) {
    m.doc() = "cluster synchronization laboratory: gains, condition audits, and switched "
              "closed-loop simulation";

    py::register_exception<ScenarioError>(m, "ScenarioError");
    py::register_exception<CareFailure>(m, "CareFailure");

    py::class_<ClusterPartition>(m, "ClusterPartition")
        .def(py::init<int, std::vector<std::vector<int>>>(), py::arg("node_count"),
             py::arg("clusters"))
        .def_property_readonly("node_count", &ClusterPartition::node_count)
        .def_property_readonly("cluster_count", &ClusterPartition::cluster_count)
        .def("cluster", &ClusterPartition::cluster)
        .def("cluster_of", &ClusterPartition::cluster_of);

    py::class_<PlantModel>(m, "PlantModel")
        .def(py::init<Matrix, Matrix>(), py::arg("A"), py::arg("B"))
        .def_readonly("A", &PlantModel::A)
        .def_readonly("B", &PlantModel::B)
        .def_property_readonly("state_dim", &PlantModel::state_dim)
        .def_property_readonly("input_dim", &PlantModel::input_dim);

    py::class_<GainSet>(m, "GainSet")
        .def_readonly("P", &GainSet::P)
        .def_readonly("K", &GainSet::K)
        .def_readonly("xi", &GainSet::xi)
        .def_readonly("xi_diag", &GainSet::xi_diag)
        .def_readonly("thresholds", &GainSet::thresholds)
        .def_readonly("are_residual", &GainSet::are_residual)
        .def_readonly("remark_residual", &GainSet::remark_residual)
        .def_readonly("closed_loop_abscissa", &GainSet::closed_loop_abscissa);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("horizon", &SimConfig::horizon)
        .def_readwrite("epsilon", &SimConfig::epsilon)
        .def_readwrite("init_range", &SimConfig::init_range)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("record_stride", &SimConfig::record_stride);

    py::class_<AverageResult>(m, "AverageResult")
        .def_readonly("adjacency_avg", &AverageResult::adjacency_avg)
        .def_readonly("pinning_avg", &AverageResult::pinning_avg)
        .def_readonly("L_inf", &AverageResult::L_inf)
        .def_readonly("kappa", &AverageResult::kappa)
        .def_readonly("beta_trace", &AverageResult::beta_trace);

    py::class_<ClusterScenario>(m, "ClusterScenario")
        .def_readwrite("name", &ClusterScenario::name)
        .def_readonly("plant", &ClusterScenario::plant)
        .def_readonly("partition", &ClusterScenario::partition)
        .def_readwrite("sim", &ClusterScenario::sim)
        .def_property_readonly("epsilon",
                               [](const ClusterScenario& s) { return s.signal.epsilon(); })
        .def_property(
            "cluster_gains",
            [](const ClusterScenario& s) { return s.coupling.cluster_gains; },
            [](ClusterScenario& s, const Vector& c) { s.coupling.cluster_gains = c; })
        .def("average", &ClusterScenario::average, py::arg("samples") = 64)
        .def("validate", &ClusterScenario::validate);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("agent_states", &Trajectory::agent_states)
        .def_readonly("leader_states", &Trajectory::leader_states)
        .def_readonly("error_series", &Trajectory::error_series)
        .def_readonly("diverged", &Trajectory::diverged)
        .def_readonly("last_time", &Trajectory::last_time);

    py::class_<DecayFit>(m, "DecayFit")
        .def_readonly("rate", &DecayFit::rate)
        .def_readonly("r_squared", &DecayFit::r_squared)
        .def_readonly("points", &DecayFit::points);

    py::class_<ConditionReport>(m, "ConditionReport")
        .def_property_readonly("verdict",
                               [](const ConditionReport& r) { return verdict_name(r.verdict); })
        .def_readonly("assumption1_ok", &ConditionReport::assumption1_ok)
        .def_readonly("assumption2_ok", &ConditionReport::assumption2_ok)
        .def_readonly("assumption3_ok", &ConditionReport::assumption3_ok)
        .def_readonly("coupling_ok", &ConditionReport::coupling_ok)
        .def_readonly("thresholds", &ConditionReport::thresholds)
        .def_readonly("assembled_lambda_min", &ConditionReport::assembled_lambda_min)
        .def_readonly("reasons", &ConditionReport::reasons)
        .def("to_text", &ConditionReport::to_text)
        .def("to_json", &ConditionReport::to_json);

    m.def("benchmark_scenario", &benchmark_scenario,
          "7-agent, 2-cluster fast-switching benchmark");
    m.def("repro_scenario", &repro_scenario, py::arg("name"));
    m.def("repro_scenario_names", &repro_scenario_names);
    m.def("example_plant", &example_plant);
    m.def("uncontrollable_plant", &uncontrollable_plant);

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("json_text"));
    m.def("serialize_scenario", &serialize_scenario, py::arg("scenario"));
    m.def("load_gains", &load_gains, py::arg("path"));
    m.def("serialize_gains", &serialize_gains, py::arg("gains"));

    m.def(
        "solve_care",
        [](const Matrix& A, const Matrix& B, const Matrix& Q, double tol) {
            const CareResult r = solve_care(A, B, Q, tol);
            return py::make_tuple(r.P, r.residual);
        },
        py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("tol") = 1e-8,
        "stabilizing solution P of A'P + PA + Q - PBB'P = 0, returned with its residual");

    m.def(
        "pbh_check",
        [](const PlantModel& plant) {
            const PbhResult r = pbh_stabilizability_check(plant);
            py::dict out;
            out["controllable"] = r.is_controllable();
            out["stabilizable"] = r.is_stabilizable();
            py::list modes;
            for (const PbhMode& mode : r.offending) {
                py::dict d;
                d["eigenvalue"] = mode.lambda;
                d["left_vector"] = mode.left_vector;
                d["sigma_min"] = mode.sigma_min;
                modes.append(d);
            }
            out["offending"] = modes;
            return out;
        },
        py::arg("plant"), "PBH eigenvalue test of (A, B)");

    m.def("synthesize_gain",
          py::overload_cast<const PlantModel&, const Matrix&>(&synthesize_gain),
          py::arg("plant"), py::arg("weight"));
    m.def("synthesize_gain", py::overload_cast<const PlantModel&>(&synthesize_gain),
          py::arg("plant"));

    m.def(
        "compute_xi",
        [](const Matrix& grounded_block, double tol) {
            const XiResult r = compute_xi(grounded_block, tol);
            return py::make_tuple(r.diag, r.certificate);
        },
        py::arg("grounded_block"), py::arg("tol") = 1e-9);
    m.def("coupling_thresholds", &coupling_thresholds, py::arg("average"), py::arg("partition"),
          py::arg("xi_blocks"));
    m.def("intra_grounded_block", &intra_grounded_block, py::arg("adjacency"), py::arg("pinning"),
          py::arg("partition"), py::arg("cluster"));
    m.def("assemble_grounded_average", &assemble_grounded_average, py::arg("average"),
          py::arg("partition"), py::arg("cluster_gains"));
    m.def(
        "weyl_bounds",
        [](const Matrix& h1, const Matrix& h2) {
            const WeylBounds b = weyl_bounds(h1, h2);
            return py::make_tuple(b.lower, b.upper);
        },
        py::arg("H1"), py::arg("H2"));

    m.def(
        "simulate",
        [](const ClusterScenario& scenario, const GainSet& gains,
           std::optional<SimConfig> config) {
            return simulate(scenario, gains, config ? *config : scenario.sim);
        },
        py::arg("scenario"), py::arg("gains"), py::arg("config") = std::nullopt);
    m.def("simulate_from", &simulate_from, py::arg("scenario"), py::arg("gains"),
          py::arg("config"), py::arg("agents0"));
    m.def("estimate_decay_rate", &estimate_decay_rate, py::arg("times"), py::arg("series"),
          py::arg("t_a"), py::arg("t_b"));

    m.def(
        "audit_scenario",
        [](const ClusterScenario& scenario, const GainSet& gains) {
            return audit_scenario(scenario, gains);
        },
        py::arg("scenario"), py::arg("gains"));
    m.def(
        "epsilon_guidance",
        [](const ClusterScenario& scenario, const GainSet& gains, double lo, double hi,
           int iterations) { return epsilon_guidance(scenario, gains, lo, hi, iterations); },
        py::arg("scenario"), py::arg("gains"), py::arg("lo"), py::arg("hi"),
        py::arg("iterations") = 8);
}
