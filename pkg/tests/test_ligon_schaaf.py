"""Regularization map: frame oracles, identities, fibers, closed form."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler import (
    DegenerateFiber,
    DelaunayState,
    IntegratorConfig,
    InvalidState,
    KappaParams,
    KeplerSystem,
    PositiveEnergy,
    ZeroFiber,
    bivector,
    circular_state,
    constraint_battery,
    delaunay_closed_form,
    delaunay_hamiltonian,
    delaunay_rhs,
    dirac_hamiltonian,
    flow_conjugacy_check,
    integrate_delaunay,
    intertwine_battery,
    intertwine_check,
    kepler_hamiltonian,
    ls_forward,
    ls_inverse,
    ls_inverse_closed,
    roundtrip_battery,
)

SYS0 = KeplerSystem.from_params(KappaParams())
SYS_A = KeplerSystem.from_params(KappaParams(a=0.1))


def test_circular_forward_oracle():
    state, frame = ls_forward([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], SYS0)
    assert_allclose(frame.a_full(), [1.0, 0.0, 0.0, 0.0], atol=1e-15)
    assert_allclose(frame.b_full(), [0.0, 1.0, 0.0, 0.0], atol=1e-15)
    assert frame.nu == pytest.approx(1.0)
    assert frame.theta == pytest.approx(0.0)
    assert_allclose(state.x, [0.0, 1.0, 0.0, 0.0], atol=1e-15)
    assert_allclose(state.y, [-1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_delaunay_energy_oracles():
    circ = DelaunayState([0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0])
    assert delaunay_hamiltonian(circ, mu=1.0) == pytest.approx(-0.5)
    wide = DelaunayState([0.0, 1.0, 0.0, 0.0], [-2.0, 0.0, 0.0, 0.0])
    assert delaunay_hamiltonian(wide, mu=1.0) == pytest.approx(-0.125)


def test_dirac_extension_oracle():
    x = np.array([1.1, 0.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0, 0.0])
    assert dirac_hamiltonian(x, y, mu=1.0) == pytest.approx(-0.395, abs=1e-15)


def _dirac_field(x, y, h=1e-6):
    gx = np.empty(4)
    gy = np.empty(4)
    for k in range(4):
        d = np.zeros(4)
        d[k] = h
        gx[k] = (dirac_hamiltonian(x + d, y) - dirac_hamiltonian(x - d, y)) / (2 * h)
        gy[k] = (dirac_hamiltonian(x, y + d) - dirac_hamiltonian(x, y - d)) / (2 * h)
    return gy, -gx  # (xdot, ydot)


def test_dirac_flow_stays_tangent():
    state, _ = ls_forward([0.9, 0.1, 0.0], [0.1, 1.0, 0.2], SYS0)
    xdot, ydot = _dirac_field(state.x, state.y)
    c1_rate = float(np.dot(state.x, xdot))
    c2_rate = float(np.dot(xdot, state.y) + np.dot(state.x, ydot))
    assert abs(c1_rate) < 1e-6
    assert abs(c2_rate) < 1e-6


def test_rhs_matches_dirac_field_on_surface():
    state, _ = ls_forward([1.2, 0.0, -0.3], [0.2, 0.8, 0.1], SYS0)
    xdot, ydot = delaunay_rhs(state.x, state.y, mu=1.0)
    fx, fy = _dirac_field(state.x, state.y)
    assert_allclose(xdot, fx, atol=1e-7)
    assert_allclose(ydot, fy, atol=1e-7)


def test_positive_energy_rejected():
    with pytest.raises(PositiveEnergy):
        ls_forward([1.0, 0.0, 0.0], [0.0, 2.0, 0.0], SYS0)


def test_fiber_guards():
    with pytest.raises(InvalidState):
        DelaunayState([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(ZeroFiber):
        delaunay_rhs([1.0, 0.0, 0.0, 0.0], [1e-13, 0.0, 0.0, 0.0])


def test_degenerate_fiber_guard():
    # a barely bound state sits against the zero-energy fiber degeneracy
    p_mag = np.sqrt(2.0 - 2e-13)
    state, _ = ls_forward([1.0, 0.0, 0.0], [0.0, p_mag, 0.0], SYS0)
    with pytest.raises(DegenerateFiber):
        ls_inverse_closed(state, SYS0)


def test_near_collision_round_trip():
    r = 1e-6
    p_mag = np.sqrt(2.0 * (1.0 / r - 0.5))  # H = -1/2 at tiny radius
    state, _ = ls_forward([r, 0.0, 0.0], [0.0, p_mag, 0.0], SYS0)
    q, p = ls_inverse_closed(state, SYS0)
    assert np.linalg.norm(q) == pytest.approx(r, rel=1e-6)
    assert_allclose(p, [0.0, p_mag, 0.0], rtol=1e-6, atol=1e-12)


def test_inverse_newton_matches_closed_form():
    q0 = np.array([0.9, 0.3, -0.4])
    p0 = np.array([0.2, -0.7, 0.5])
    state, _ = ls_forward(q0, p0, SYS_A)
    qc, pc = ls_inverse_closed(state, SYS_A)
    qn, pn = ls_inverse(state, SYS_A)
    assert_allclose(qc, q0, atol=1e-12)
    assert_allclose(pc, p0, atol=1e-12)
    assert_allclose(qn, qc, atol=1e-9)
    assert_allclose(pn, pc, atol=1e-9)


def test_intertwine_check_single_state():
    rep = intertwine_check([1.1, 0.2, 0.0], [0.0, 0.9, 0.1], SYS0)
    assert rep.passed
    assert rep.max_residual < 1e-12
    assert rep.details["identity1_max"] < 1e-12
    assert rep.details["identity2_max"] < 1e-12


def test_batteries_pass_at_small_scale():
    for sys_ in (SYS0, SYS_A):
        reps = intertwine_battery(sys_, n_points=20)
        reps += constraint_battery(sys_, n_points=20)
        reps.append(roundtrip_battery(sys_, n_points=10))
        assert all(r.passed for r in reps)
    names = {r.identity_name for r in intertwine_battery(SYS0, n_points=2)}
    assert names == {"ligon-schaaf:wedge-angular-momentum",
                     "ligon-schaaf:wedge-runge-lenz"}


def test_energy_match_row_flags_deformed_ratio():
    by = {r.identity_name: r for r in constraint_battery(SYS_A, n_points=5)}
    assert by["ligon-schaaf:energy-match"].passed
    assert by["ligon-schaaf:energy-match"].warning is not None
    by0 = {r.identity_name: r for r in constraint_battery(SYS0, n_points=5)}
    assert by0["ligon-schaaf:energy-match"].warning is None


def test_regularized_energy_matches_undeformed_hamiltonian():
    q = np.array([1.1, 0.2, 0.0])
    p = np.array([0.0, 0.9, 0.1])
    state, _ = ls_forward(q, p, SYS0)
    assert delaunay_hamiltonian(state, SYS0.mu_tilde) == pytest.approx(
        kepler_hamiltonian(q, p, SYS0), abs=1e-13)


def test_flow_conjugacy_short():
    q, p = circular_state(1.0, SYS0)
    rep = flow_conjugacy_check(q, p, SYS0, t=1.0, n_checkpoints=4)
    assert rep.passed
    assert rep.details["measured_rate"] == pytest.approx(1.0, rel=1e-6)
    assert rep.details["expected_rate"] == pytest.approx(1.0, rel=1e-12)


def test_closed_form_matches_integrator():
    state, _ = ls_forward([0.8, 0.0, 0.3], [0.1, 1.0, -0.2], SYS0)
    mu = SYS0.mu_tilde
    cfg = IntegratorConfig(method="rk4", step=1e-3)
    traj = integrate_delaunay(state, mu, 5.0, cfg)
    assert traj.termination_name == "completed"
    xd, yd = delaunay_closed_form(state, mu, traj.param)
    assert_allclose(traj.states[:, :4], xd, atol=1e-9)
    assert_allclose(traj.states[:, 4:], yd, atol=1e-9)


def test_closed_form_scalar_time():
    state = DelaunayState([0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0])
    x, y = delaunay_closed_form(state, 1.0, 0.0)
    assert_allclose(x, state.x, atol=0)
    assert_allclose(y, state.y, atol=0)


def test_bivector_components():
    b = bivector([1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0])
    assert b.shape == (6,)
    assert np.count_nonzero(b) == 1
    assert 2.0 in b
