"""Stereographic projection oracles, chart plumbing, symplectic checks."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler import (
    Chart,
    InvalidState,
    KappaParams,
    PhasePoint,
    PoleSingularity,
    SphereState,
    kappa_stereo_forward,
    kappa_stereo_inverse,
    sphere_chart,
    sphere_chart_inverse,
    stereo_forward,
    stereo_inverse,
    stereo_symplectic_suite,
    symplectic_check,
)


def test_south_pole_oracle():
    s = SphereState([0.0, 0.0, -1.0], [0.0, 1.0, 0.0])
    pt = stereo_forward(s)
    assert pt.chart is Chart.COMMUTATIVE
    assert_allclose(pt.position, [0.0, 0.0], atol=0)
    assert_allclose(pt.momentum, [0.0, 2.0], atol=0)


def test_equator_oracle():
    s = SphereState([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    pt = stereo_forward(s)
    assert_allclose(pt.position, [1.0, 0.0], atol=1e-15)
    assert_allclose(pt.momentum, [1.0, 0.0], atol=1e-15)


def test_inverse_oracle():
    pt = PhasePoint([0.0, 0.0], [1.0, 0.0], Chart.COMMUTATIVE)
    s = stereo_inverse(pt)
    assert_allclose(s.u, [0.0, 0.0, -1.0], atol=0)
    assert_allclose(s.v, [0.5, 0.0, 0.0], atol=0)


def test_kappa_inverse_oracle():
    par = KappaParams(a=0.1, alpha=1.0, p0=1.0)
    pt = PhasePoint([1.1, 0.0], [0.0, 1.1], Chart.KAPPA)
    s = kappa_stereo_inverse(pt, par)
    assert_allclose(s.u, [2.2 / 2.21, 0.0, 0.21 / 2.21], rtol=1e-14)
    assert_allclose(s.v, [0.0, 2.21 * 1.1 / 2.0, 0.0], rtol=1e-14, atol=1e-15)


def test_pole_guard():
    s = SphereState.project([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    with pytest.raises(PoleSingularity):
        stereo_forward(s)


def test_round_trip_both_ways():
    rng = np.random.default_rng(8)
    for _ in range(25):
        s = SphereState.project(rng.normal(size=4), rng.normal(size=4))
        if s.u[-1] > 0.9:
            continue
        back = stereo_inverse(stereo_forward(s))
        assert_allclose(back.flat(), s.flat(), atol=1e-12)
    for _ in range(25):
        X, Y = rng.uniform(-2, 2, size=3), rng.uniform(-2, 2, size=3)
        pt = PhasePoint(X, Y, Chart.COMMUTATIVE)
        im = stereo_forward(stereo_inverse(pt))
        assert_allclose(im.position, X, atol=1e-12)
        assert_allclose(im.momentum, Y, atol=1e-12)


def test_kappa_round_trip():
    par = KappaParams(a=0.1)
    rng = np.random.default_rng(9)
    for _ in range(10):
        s = SphereState.project(rng.normal(size=4), rng.normal(size=4))
        if s.u[-1] > 0.9:
            continue
        back = kappa_stereo_inverse(kappa_stereo_forward(s, par), par)
        assert_allclose(back.flat(), s.flat(), atol=1e-12)


def test_state_validation():
    with pytest.raises(InvalidState):
        SphereState([1.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    with pytest.raises(InvalidState):
        SphereState([1.0, 0.0, 0.0], [0.5, 0.0, 0.0])
    s = SphereState.project([2.0, 0.0, 0.0], [0.3, 1.0, 0.0])
    assert_allclose(np.linalg.norm(s.u), 1.0, rtol=1e-15)
    assert abs(float(np.dot(s.u, s.v))) < 1e-15


def test_local_chart_round_trip():
    s = SphereState.project([0.3, -1.2, 0.4, 0.8], [1.0, 0.2, -0.5, 0.1])
    z, index, sign = sphere_chart(s)
    back = sphere_chart_inverse(z, index, sign)
    assert_allclose(back.flat(), s.flat(), atol=1e-12)


def test_symplectic_check_accepts_identity_and_rejects_stretch():
    z0 = np.array([0.2, -0.4, 0.9, 1.1])
    ok = symplectic_check(lambda z: z.copy(), z0)
    assert ok.passed
    assert ok.warning is None
    bad = symplectic_check(lambda z: np.concatenate([2.0 * z[:2], z[2:]]), z0)
    assert not bad.passed


def test_symplectic_check_scale_target_warns():
    z0 = np.array([0.2, -0.4, 0.9, 1.1])
    rep = symplectic_check(lambda z: 2.0 * z, z0, scale=4.0)
    assert rep.passed
    assert rep.warning is not None
    assert "conformally" in rep.warning
    assert rep.details["plain_form_deviation"] == pytest.approx(3.0, abs=1e-6)


def test_suite_shape_and_conformal_flags():
    reps = stereo_symplectic_suite(n_points=10, seed=2)
    assert [r.identity_name for r in reps] == ["stereo:forward", "stereo:inverse"]
    assert all(r.passed for r in reps)

    reps = stereo_symplectic_suite(KappaParams(a=0.1), n_points=5, seed=2)
    assert [r.identity_name for r in reps] == [
        "stereo:forward",
        "stereo:inverse",
        "stereo:kappa-forward-realized",
        "stereo:kappa-inverse-realized",
    ]
    assert all(r.passed for r in reps)
    assert reps[2].warning is not None
    assert reps[3].warning is not None
