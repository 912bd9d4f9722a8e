"""Smoke tests for the python bindings: synthesis, audit, and a short run."""

import numpy as np
import pytest

import clustersync as cs


def test_pbh_verdicts():
    nominal = cs.pbh_check(cs.example_plant())
    assert nominal["controllable"]
    assert nominal["stabilizable"]

    modified = cs.pbh_check(cs.uncontrollable_plant())
    assert not modified["controllable"]
    assert not modified["stabilizable"]
    worst = modified["offending"][0]["eigenvalue"]
    assert abs(worst - 5.0) < 1e-8


def test_care_against_scalar_closed_form():
    a = np.array([[2.0]])
    b = np.array([[1.0]])
    p, residual = cs.solve_care(a, b, np.eye(1))
    assert abs(p[0, 0] - (2.0 + np.sqrt(5.0))) < 1e-12
    assert residual < 1e-12


def test_gain_synthesis_residual():
    gains = cs.synthesize_gain(cs.example_plant())
    assert gains.are_residual <= 1e-8
    assert np.allclose(gains.K, cs.example_plant().B.T @ gains.P)
    assert gains.closed_loop_abscissa < 0


def test_benchmark_audit_is_certified():
    scenario = cs.benchmark_scenario()
    gains = cs.synthesize_gain(scenario.plant, np.asarray(1000.0 * np.eye(4)))
    report = cs.audit_scenario(scenario, gains)
    assert report.verdict == "certified"
    assert report.assembled_lambda_min > 0
    assert len(report.thresholds) == 2
    assert all(scenario.cluster_gains > report.thresholds)


def test_short_simulation_decays():
    scenario = cs.benchmark_scenario()
    config = scenario.sim
    config.horizon = 4.0  # past the non-normal transient
    gains = cs.synthesize_gain(scenario.plant, np.asarray(1000.0 * np.eye(4)))
    traj = cs.simulate(scenario, gains, config)
    assert not traj.diverged
    total = np.asarray(traj.error_series).sum(axis=1)
    assert total[-1] < 0.2 * total[0]
    fit = cs.estimate_decay_rate(traj.times, total, 1.5, 4.0)
    assert fit.rate > 0.5


def test_scenario_json_round_trip():
    scenario = cs.benchmark_scenario()
    text = cs.serialize_scenario(scenario)
    parsed = cs.parse_scenario(text)
    assert cs.serialize_scenario(parsed) == text
    with pytest.raises(cs.ScenarioError):
        cs.parse_scenario("{\"plant\": {}}")


def test_uncontrollable_scenario_audit():
    scenario = cs.repro_scenario("fig6")
    gains = cs.synthesize_gain(cs.example_plant())
    report = cs.audit_scenario(scenario, gains)
    assert report.verdict == "necessarily-fails"
    assert any("uncontrollable" in r for r in report.reasons)
