"""Cluster synchronization laboratory for fast-switching pinned networks.

Thin wrapper over the compiled core: gain synthesis (Riccati), condition
audits (stabilizability, in-degree balance, averaged spanning trees, coupling
thresholds), and closed-loop simulation of the switched system.
"""

from ._clustersync import (
    AverageResult,
    CareFailure,
    ClusterPartition,
    ClusterScenario,
    ConditionReport,
    DecayFit,
    GainSet,
    PlantModel,
    ScenarioError,
    SimConfig,
    Trajectory,
    assemble_grounded_average,
    audit_scenario,
    benchmark_scenario,
    compute_xi,
    coupling_thresholds,
    epsilon_guidance,
    estimate_decay_rate,
    example_plant,
    intra_grounded_block,
    load_gains,
    load_scenario,
    parse_scenario,
    pbh_check,
    repro_scenario,
    repro_scenario_names,
    serialize_gains,
    serialize_scenario,
    simulate,
    simulate_from,
    solve_care,
    synthesize_gain,
    uncontrollable_plant,
    weyl_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AverageResult",
    "CareFailure",
    "ClusterPartition",
    "ClusterScenario",
    "ConditionReport",
    "DecayFit",
    "GainSet",
    "PlantModel",
    "ScenarioError",
    "SimConfig",
    "Trajectory",
    "assemble_grounded_average",
    "audit_scenario",
    "benchmark_scenario",
    "compute_xi",
    "coupling_thresholds",
    "epsilon_guidance",
    "estimate_decay_rate",
    "example_plant",
    "intra_grounded_block",
    "load_gains",
    "load_scenario",
    "parse_scenario",
    "pbh_check",
    "repro_scenario",
    "repro_scenario_names",
    "serialize_gains",
    "serialize_scenario",
    "simulate",
    "simulate_from",
    "solve_care",
    "synthesize_gain",
    "uncontrollable_plant",
    "weyl_bounds",
]
