"""Poisson-bracket engine oracles and the deformed-algebra audit."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler import (
    KappaParams,
    NonFiniteEvaluation,
    bracket_audit,
    jacobi_residual,
    poisson_bracket,
    realize_full,
    sample_full_points,
)
from kappakepler.brackets import _full_component

Z6 = np.array([0.3, -0.2, 0.5, 0.1, 0.7, -0.4])

AUDIT_NAMES = {
    "spatial:position-position-vanish",
    "spatial:momentum-momentum-vanish",
    "spatial:position-momentum-pairing",
    "full:time-space-closure",
    "full:position-position-vanish",
    "full:momentum-momentum-vanish",
    "full:position-momentum-pairing",
    "full:time-momentum-closure",
}


def test_canonical_pairs():
    assert poisson_bracket(lambda q, p: q[0], lambda q, p: p[0], Z6) == pytest.approx(1.0, abs=1e-9)
    assert poisson_bracket(lambda q, p: q[0], lambda q, p: p[1], Z6) == pytest.approx(0.0, abs=1e-9)
    assert poisson_bracket(lambda q, p: q[0], lambda q, p: q[1], Z6) == pytest.approx(0.0, abs=1e-9)


def test_polynomial_bracket_matches_hand_value():
    # {q0^2 p1, q1 p0} = 2 q0 q1 p1 - q0^2 p0
    f = lambda q, p: q[0] ** 2 * p[1]
    g = lambda q, p: q[1] * p[0]
    q, p = Z6[:3], Z6[3:]
    expect = 2.0 * q[0] * q[1] * p[1] - q[0] ** 2 * p[0]
    assert poisson_bracket(f, g, Z6) == pytest.approx(expect, abs=1e-9)


def test_weighted_bracket_flips_the_time_pair():
    z8 = np.arange(1.0, 9.0) / 3.0
    w = (-1.0, 1.0, 1.0, 1.0)
    b = poisson_bracket(lambda q, p: q[0], lambda q, p: p[0], z8, weights=w)
    assert b == pytest.approx(-1.0, abs=1e-9)


def test_weight_length_must_match():
    with pytest.raises(ValueError):
        poisson_bracket(lambda q, p: q[0], lambda q, p: p[0], Z6, weights=[1.0, 1.0])


def test_non_finite_fields_are_reported():
    with pytest.raises(NonFiniteEvaluation):
        poisson_bracket(lambda q, p: float("nan"), lambda q, p: p[0], Z6)


def test_jacobi_identity_on_polynomials():
    f = lambda q, p: q[0] * p[1]
    g = lambda q, p: q[1] * q[2]
    k = lambda q, p: p[0] + q[2] * p[2]
    assert jacobi_residual(f, g, k, Z6) < 1e-6


def test_audit_shape_and_undeformed_silence():
    reps = bracket_audit(KappaParams(), n_points=8, seed=3)
    assert {r.identity_name for r in reps} == AUDIT_NAMES
    assert all(r.passed for r in reps)
    assert all(r.warning is None for r in reps)


def test_audit_flags_conformal_pairing_without_failing():
    reps = bracket_audit(KappaParams(a=0.1), n_points=8, seed=3)
    by = {r.identity_name: r for r in reps}
    assert all(r.passed for r in reps)
    spatial = by["spatial:position-momentum-pairing"]
    assert spatial.warning is not None
    assert_allclose(spatial.details["scale_squared"], 0.81, rtol=1e-12)
    assert_allclose(spatial.details["measured_diagonal_mean"], 0.81, atol=1e-8)
    assert by["full:position-momentum-pairing"].warning is not None


def test_audit_agrees_with_the_reference_engine():
    # the audit's batched table and the one-pair engine see the same closure,
    # which holds at the closure-point realization (the default alpha)
    par = KappaParams(a=0.1)
    fp = sample_full_points(1, 3, 21)[0]
    w = (-1.0, 1.0, 1.0, 1.0)
    psi0 = _full_component(par, 0, "pos")
    psi2 = _full_component(par, 2, "pos")
    direct = poisson_bracket(psi0, psi2, fp, weights=w)
    expect = par.a * realize_full(fp, par).x[2]
    assert direct == pytest.approx(expect, abs=1e-8)


def test_audit_fails_honestly_for_nonzero_beta():
    reps = bracket_audit(KappaParams(a=0.1, beta=0.05), n_points=4, seed=5)
    by = {r.identity_name: r for r in reps}
    assert not by["full:time-space-closure"].passed
    assert by["full:time-space-closure"].warning is not None
    # the spatial chart never sees beta
    assert by["spatial:position-position-vanish"].passed
    assert by["spatial:position-momentum-pairing"].passed
