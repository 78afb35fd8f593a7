"""Kepler system oracles and the conserved-rotor audit."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler import (
    IntegratorConfig,
    InvalidParams,
    KappaParams,
    KeplerSystem,
    PositiveEnergy,
    circular_period,
    circular_state,
    conserved_set,
    escape_momentum,
    integrate_kepler,
    integrate_kepler_at_times,
    kepler_hamiltonian,
    period_from_energy,
    sample_bound_states,
    so4_audit,
)

SYS0 = KeplerSystem.from_params(KappaParams())

SO4_NAMES = {
    "so4:LL-closure",
    "so4:LB-vector",
    "so4:BB-closure",
    "so4:UU-closure",
    "so4:VV-closure",
    "so4:UV-commute",
    "so4:runge-lenz-norm",
}


def test_deformed_constants_oracle():
    sys_a = KeplerSystem.from_params(KappaParams(a=0.1, alpha=1.0))
    assert_allclose(sys_a.mu_tilde, 1.0 / 1.1, rtol=1e-15)
    assert_allclose(sys_a.c_tilde, 1.1, rtol=1e-15)


def test_hamiltonian_and_conserved_oracle():
    q = np.array([1.0, 0.0, 0.0])
    p = np.array([0.0, 1.1, 0.0])
    assert kepler_hamiltonian(q, p, SYS0) == pytest.approx(-0.395, abs=1e-15)
    cs = conserved_set(q, p, SYS0)
    assert_allclose(cs.L, [0.0, 0.0, 1.1], atol=1e-15)
    assert_allclose(cs.A, [0.21, 0.0, 0.0], atol=1e-15)
    assert cs.bound


def test_runge_lenz_norm_identity():
    for sys_ in (SYS0, KeplerSystem.from_params(KappaParams(a=0.1))):
        for pt in sample_bound_states(30, 17, sys_):
            cs = conserved_set(pt.position, pt.momentum, sys_)
            lhs = float(np.dot(cs.A, cs.A))
            rhs = (sys_.c_tilde**2
                   + 2.0 * cs.H * float(np.dot(cs.L, cs.L)) / sys_.mu_tilde)
            assert lhs == pytest.approx(rhs, abs=1e-12)


def test_runge_lenz_norm_identity_symbolic():
    sp = pytest.importorskip("sympy")
    q = sp.Matrix(sp.symbols("q1 q2 q3", real=True))
    p = sp.Matrix(sp.symbols("p1 p2 p3", real=True))
    mu, c = sp.symbols("mu c", positive=True)
    r = sp.sqrt(q.dot(q))
    L = q.cross(p)
    A = p.cross(L) / mu - c * q / r
    H = p.dot(p) / (2 * mu) - c / r
    expr = A.dot(A) - c**2 - 2 * H * L.dot(L) / mu
    assert sp.simplify(expr) == 0


def test_escape_momentum_sits_on_zero_energy():
    p_esc = escape_momentum(1.7, SYS0)
    H = kepler_hamiltonian([1.7, 0.0, 0.0], [0.0, p_esc, 0.0], SYS0)
    assert H == pytest.approx(0.0, abs=1e-15)


def test_circular_orbit_periods_agree():
    q, p = circular_state(1.3, SYS0)
    H = kepler_hamiltonian(q, p, SYS0)
    assert circular_period(1.3, SYS0) == pytest.approx(
        period_from_energy(H, SYS0), rel=1e-12)


def test_require_bound_guard():
    with pytest.raises(PositiveEnergy):
        conserved_set([1.0, 0.0, 0.0], [0.0, 2.0, 0.0], SYS0, require_bound=True)
    with pytest.raises(PositiveEnergy):
        period_from_energy(0.5, SYS0)


def test_so4_audit_shape():
    reps = so4_audit(SYS0, n_points=8, seed=3)
    assert {r.identity_name for r in reps} == SO4_NAMES
    assert all(r.passed for r in reps)


def test_circular_orbit_integrates_around():
    r = 1.0
    q, p = circular_state(r, SYS0)
    T = circular_period(r, SYS0)
    cfg = IntegratorConfig(method="verlet", step=1e-3)
    traj = integrate_kepler(q, p, SYS0, T, cfg)
    assert traj.termination_name == "completed"
    radii = np.linalg.norm(traj.states[:, :3], axis=1)
    assert np.max(np.abs(radii - r)) < 1e-6
    assert_allclose(traj.final_state[:3], q, atol=1e-4)


def test_radial_fall_stops_at_the_guard():
    cfg = IntegratorConfig(method="verlet", step=1e-3, adaptive=True)
    traj = integrate_kepler([2.0, 0.0, 0.0], [0.0, 0.0, 0.0], SYS0, 10.0, cfg)
    assert traj.termination_name in ("collision", "min_step_reached")
    assert traj.param[-1] < 10.0


def test_invariant_series_and_determinism():
    q, p = circular_state(1.0, SYS0)
    cfg = IntegratorConfig(method="rk4", step=1e-3)
    t1 = integrate_kepler(q, p, SYS0, 3.0, cfg)
    t2 = integrate_kepler(q, p, SYS0, 3.0, cfg)
    assert np.array_equal(t1.states, t2.states)
    assert set(t1.invariants) == {"H", "L", "A"}
    for key in ("H", "L", "A"):
        series = t1.invariants[key]
        assert np.max(np.abs(series - series[0])) < 1e-10


def test_at_times_matches_driver():
    q, p = circular_state(1.0, SYS0)
    cfg = IntegratorConfig(method="rk4", step=1e-3)
    traj = integrate_kepler(q, p, SYS0, 1.0, cfg)
    idx = [100, 500, 1000]
    states = integrate_kepler_at_times(q, p, SYS0, traj.param[idx], h_sub=1e-3)
    assert_allclose(states, traj.states[idx], atol=1e-10)


def test_at_times_validates_input():
    with pytest.raises(InvalidParams):
        integrate_kepler_at_times([1.0, 0, 0], [0.0, 1, 0], SYS0, [0.5, 0.2])
    with pytest.raises(InvalidParams):
        integrate_kepler_at_times([1.0, 0, 0], [0.0, 1, 0], SYS0, [])
