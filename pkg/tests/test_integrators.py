"""Generic fixed-step driver: textbook flows, drift reports, serialization."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler import (
    IntegratorConfig,
    InvalidParams,
    Trajectory,
    drift_report,
    integrate,
)


def harmonic_rhs(t, z):
    return np.array([z[1], -z[0]])


def test_harmonic_oscillator_energy_oracle():
    cfg = IntegratorConfig(method="rk4", step=1e-3)
    traj = integrate(harmonic_rhs, [1.0, 0.0], 100.0, cfg)
    E = 0.5 * np.sum(traj.states**2, axis=1)
    assert np.max(np.abs(E - E[0])) < 1e-8
    assert traj.termination_name == "completed"


def test_verlet_separable_holds_energy():
    cfg = IntegratorConfig(method="verlet", step=1e-3)
    traj = integrate(harmonic_rhs, [1.0, 0.0], 10.0, cfg,
                     separable=(1.0, lambda q: -q))
    E = 0.5 * np.sum(traj.states**2, axis=1)
    assert np.max(np.abs(E - E[0])) < 1e-6


def test_midpoint_conserves_quadratic_energy():
    cfg = IntegratorConfig(method="midpoint", step=1e-2)
    traj = integrate(harmonic_rhs, [1.0, 0.0], 6.28, cfg)
    E = 0.5 * np.sum(traj.states**2, axis=1)
    assert np.max(np.abs(E - E[0])) < 1e-9


def test_verlet_requires_separable():
    cfg = IntegratorConfig(method="verlet", step=1e-3)
    with pytest.raises(InvalidParams):
        integrate(harmonic_rhs, [1.0, 0.0], 1.0, cfg)


def test_adaptive_rejected_by_generic_driver():
    cfg = IntegratorConfig(method="rk4", step=1e-3, adaptive=True)
    with pytest.raises(InvalidParams):
        integrate(harmonic_rhs, [1.0, 0.0], 1.0, cfg)


def test_config_validation():
    with pytest.raises(InvalidParams):
        IntegratorConfig(method="euler")
    with pytest.raises(InvalidParams):
        IntegratorConfig(step=1e-7, min_step=1e-6)
    with pytest.raises(InvalidParams):
        IntegratorConfig(tolerance=0.0)
    cfg = IntegratorConfig(step=1e-2)
    assert cfg.with_(step=1e-3).step == 1e-3


def test_deterministic_repeats():
    cfg = IntegratorConfig(method="rk4", step=1e-2)
    a = integrate(harmonic_rhs, [0.3, 0.7], 5.0, cfg)
    b = integrate(harmonic_rhs, [0.3, 0.7], 5.0, cfg)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.param, b.param)


def test_nonfinite_flow_terminates_early():
    cfg = IntegratorConfig(method="rk4", step=1e-2)
    with np.errstate(over="ignore", invalid="ignore"):
        traj = integrate(lambda t, z: z**3, [3.0], 10.0, cfg)
    assert traj.termination_name == "non_finite"
    assert traj.param[-1] < 10.0
    assert np.all(np.isfinite(traj.states))


def test_drift_report_measures():
    t = np.linspace(0.0, 1.0, 101)
    osc = 1e-3 * np.sin(2 * np.pi * 5 * t)
    line = 1e-3 * t
    traj = Trajectory(t, np.zeros((101, 2)), ["z1", "z2"],
                      invariants={"osc": osc, "line": line})
    by_max = {r.identity_name: r for r in drift_report(traj, tolerance=1e-9)}
    assert not by_max["drift:osc"].passed

    sec = {r.identity_name: r for r in drift_report(traj, tolerance=1e-9,
                                                    measure="secular")}
    # the oscillation has no trend; the line's trend equals its terminal offset
    assert (sec["drift:osc"].details["secular_drift"]
            < by_max["drift:osc"].details["max_drift"])
    assert sec["drift:line"].details["secular_drift"] == pytest.approx(1e-3, rel=1e-9)

    term = {r.identity_name: r for r in drift_report(traj, tolerance=2e-3,
                                                     measure="terminal")}
    assert term["drift:line"].passed

    with pytest.raises(InvalidParams):
        drift_report(traj, measure="rms")


def test_drift_report_needs_or_builds_series():
    t = np.linspace(0.0, 1.0, 11)
    states = np.column_stack([np.cos(t), np.sin(t)])
    traj = Trajectory(t, states, ["z1", "z2"])
    with pytest.raises(InvalidParams):
        drift_report(traj)
    reps = drift_report(traj, invariant_fns={"norm": lambda z: float(z @ z)},
                        tolerance=1e-12)
    assert reps[0].identity_name == "drift:norm"
    assert reps[0].passed


def test_trajectory_serialization_precision():
    t = np.array([0.0, 0.1])
    states = np.array([[0.1, 0.2], [0.30000000000000004, 1.0 / 3.0]])
    traj = Trajectory(t, states, ["z1", "z2"],
                      invariants={"E": np.array([0.1, 0.1])})
    data = json.loads(traj.to_json())
    assert data["states"][1][1] == states[1][1]  # 17 digits survive the trip
    assert data["states"][1][0] == states[1][0]
    csv = traj.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "# chart: commutative"
    assert lines[1] == "t,z1,z2,E"
    assert float(lines[2].split(",")[0]) == 0.0


def test_trajectory_shape_validation():
    with pytest.raises(InvalidParams):
        Trajectory([0.0, 1.0], np.zeros((3, 2)), ["a", "b"])
    with pytest.raises(InvalidParams):
        Trajectory([0.0, 1.0], np.zeros((2, 2)), ["a"])
    with pytest.raises(InvalidParams):
        Trajectory([0.0, 1.0], np.zeros((2, 2)), ["a", "b"]).with_invariants(
            E=np.zeros(3))
