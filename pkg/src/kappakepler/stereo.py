"""Stereographic projection between T*S^d and flat phase space.

Forward maps the punctured cotangent bundle of the unit sphere (puncture at
the north pole e_{d+1}) to flat phase space; inverse goes back. The kappa
variants apply the same formulas to deformed-chart points. A finite-difference
symplecticity checker verifies that these maps preserve the canonical
structure, with an optional conformal scale target for the deformed
composites (which stretch the form by scale^2 by construction).

Constrained points are handled through a local cotangent chart: drop the
coordinate axis where |u_i| is largest and use
    uhat = u without component i*,  mhat_k = v_k - v_{i*} u_k / u_{i*},
which are canonical coordinates for the restricted form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidState, NonFiniteEvaluation, PoleSingularity
from .realization import Chart, KappaParams, PhasePoint
from .realization import realize_spatial, realize_spatial_inverse
from .reporting import CheckReport, make_report

POLE_GUARD = 1e-12


@dataclass(frozen=True)
class SphereState:
    """Point of T*S^d: |u| = 1 and <u, v> = 0 in R^{d+1}."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        if u.size != v.size:
            raise InvalidState("u and v dimensions differ")
        if abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise InvalidState(f"|u| = {np.linalg.norm(u)!r} is not 1")
        if abs(float(np.dot(u, v))) > 1e-10:
            raise InvalidState(f"<u,v> = {float(np.dot(u, v))!r} is not 0")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def d(self) -> int:
        return self.u.size - 1

    @classmethod
    def project(cls, u, v) -> "SphereState":
        """Build a valid state from approximate data: normalize u, then
        remove the normal component of v."""
        u = np.asarray(u, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        n = np.linalg.norm(u)
        if n == 0:
            raise InvalidState("cannot normalize the zero vector")
        u = u / n
        v = v - np.dot(u, v) * u
        return cls(u, v)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


def _check_pole(u_last: float):
    if u_last > 1.0 - POLE_GUARD:
        raise PoleSingularity(f"u_{{d+1}} = {u_last} is inside the pole guard")


def stereo_forward(s: SphereState) -> PhasePoint:
    """T*S^d -> flat phase space (commutative chart)."""
    return _forward(s, Chart.COMMUTATIVE)


def stereo_inverse(pt: PhasePoint) -> SphereState:
    """Flat phase space -> T*S^d. Total map; the pole is the image of infinity."""
    pt.require_chart(Chart.COMMUTATIVE)
    return _inverse(pt.position, pt.momentum)


def kappa_stereo_forward(s: SphereState, params: KappaParams | None = None) -> PhasePoint:
    """Same projection formulas, landing in the deformed chart.

    The formulas involve only the chart representatives, so params carries no
    numerical content here; it is accepted for signature symmetry with the
    other deformed operations.
    """
    return _forward(s, Chart.KAPPA)


def kappa_stereo_inverse(pt: PhasePoint, params: KappaParams | None = None) -> SphereState:
    """Deformed chart -> T*S^d, with norms taken on the chart representatives."""
    pt.require_chart(Chart.KAPPA)
    return _inverse(pt.position, pt.momentum)


def _forward(s: SphereState, chart: Chart) -> PhasePoint:
    u, v = s.u, s.v
    _check_pole(u[-1])
    one_minus = 1.0 - u[-1]
    X = u[:-1] / one_minus
    Y = v[:-1] * one_minus + v[-1] * u[:-1]
    return PhasePoint(X, Y, chart)


def _inverse(X: np.ndarray, Y: np.ndarray) -> SphereState:
    x2 = float(np.dot(X, X))
    xy = float(np.dot(X, Y))
    denom = x2 + 1.0
    u = np.concatenate([2.0 * X / denom, [(x2 - 1.0) / denom]])
    v = np.concatenate([0.5 * denom * Y - xy * X, [xy]])
    return SphereState(u, v)


# ----------------------------------------------------------------------
# local canonical chart on T*S^d

def sphere_chart(s: SphereState, index: int | None = None) -> tuple[np.ndarray, int, float]:
    """Flatten a constrained state to 2d canonical coordinates.

    Returns (z, index, sign) where z = (uhat, mhat), index is the dropped
    axis and sign the side of the sphere the chart covers.
    """
    u, v = s.u, s.v
    i = int(np.argmax(np.abs(u))) if index is None else index
    if u[i] == 0.0:
        raise InvalidState("chart axis degenerate: u_i = 0")
    sign = 1.0 if u[i] > 0 else -1.0
    uhat = np.delete(u, i)
    mhat = np.delete(v, i) - v[i] * np.delete(u, i) / u[i]
    return np.concatenate([uhat, mhat]), i, sign


def sphere_chart_inverse(z: np.ndarray, index: int, sign: float) -> SphereState:
    """Rebuild the constrained state from chart coordinates."""
    z = np.asarray(z, dtype=float).ravel()
    d = z.size // 2
    uhat, mhat = z[:d], z[d:]
    rem = 1.0 - float(np.dot(uhat, uhat))
    if rem <= 0.0:
        raise InvalidState("chart coordinates left the unit ball")
    u = np.insert(uhat, index, sign * np.sqrt(rem))
    vt = np.insert(mhat, index, 0.0)
    v = vt - np.dot(vt, u) * u
    return SphereState(u, v)


def sphere_map_as_chart(fn: Callable[[SphereState], np.ndarray],
                        base: SphereState) -> tuple[Callable[[np.ndarray], np.ndarray], np.ndarray]:
    """Present a map defined on T*S^d as a flat map on chart coordinates.

    The chart axis is frozen at the base point so finite differencing stays in
    one coordinate patch.
    """
    z0, idx, sign = sphere_chart(base)

    def flat_fn(z: np.ndarray) -> np.ndarray:
        return fn(sphere_chart_inverse(z, idx, sign))

    return flat_fn, z0


# ----------------------------------------------------------------------
# symplecticity verification

def canonical_form_matrix(dim2: int, weights=None) -> np.ndarray:
    """Block form [[0, W], [-W, 0]] on flat vectors (q_1..q_n, p_1..p_n)."""
    if dim2 % 2:
        raise ValueError("phase dimension must be even")
    n = dim2 // 2
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    W = np.diag(w)
    Z = np.zeros((n, n))
    return np.block([[Z, W], [-W, Z]])


def fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], z: np.ndarray,
                h: float) -> np.ndarray:
    """Central-difference Jacobian with one Richardson step."""
    def jac(step: float) -> np.ndarray:
        cols = []
        for k in range(z.size):
            zp = z.copy()
            zm = z.copy()
            zp[k] += step
            zm[k] -= step
            fp = np.asarray(fn(zp), dtype=float)
            fm = np.asarray(fn(zm), dtype=float)
            if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
                raise NonFiniteEvaluation("map returned non-finite values in stencil")
            cols.append((fp - fm) / (2.0 * step))
        return np.column_stack(cols)

    return (4.0 * jac(h / 2.0) - jac(h)) / 3.0


def symplectic_check(map_fn: Callable[[np.ndarray], np.ndarray], pt,
                     h: float = 1e-6, scale: float = 1.0,
                     tolerance: float = 1e-6, name: str = "symplectic-check",
                     weights_in=None, weights_out=None) -> CheckReport:
    """Verify that map_fn pulls the canonical form back to scale * (form).

    map_fn takes and returns flat even-dimensional vectors; the codomain may
    be larger than the domain (embedding into a constrained ambient space),
    in which case the ambient form is pulled back. Reports
    max |J^T W_out J - scale * W_in| entrywise; when scale differs from 1 the
    deviation of the plain (scale 1) comparison is recorded and flagged.
    """
    flat = getattr(pt, "flat", None)
    z0 = flat() if callable(flat) else np.asarray(pt, dtype=float).ravel()
    J = fd_jacobian(map_fn, z0, h)
    omega_in = canonical_form_matrix(J.shape[1], weights_in)
    omega_out = canonical_form_matrix(J.shape[0], weights_out)
    pulled = J.T @ omega_out @ J
    resid = float(np.max(np.abs(pulled - scale * omega_in)))
    details = {"scale_target": scale}
    warn = None
    if scale != 1.0:
        plain = float(np.max(np.abs(pulled - omega_in)))
        details["plain_form_deviation"] = plain
        warn = (f"map is conformally canonical: form scaled by {scale:.12g}, "
                f"plain-form deviation {plain:.3e}")
    return make_report(name, [resid], tolerance, warning=warn, details=details)


def symplectic_battery(map_fn, points, h: float = 1e-6, scale: float = 1.0,
                       tolerance: float = 1e-6, name: str = "symplectic-battery",
                       weights_in=None, weights_out=None) -> CheckReport:
    """symplectic_check aggregated over a batch of base points."""
    residuals = []
    plains = []
    for pt in points:
        rep = symplectic_check(map_fn, pt, h=h, scale=scale, tolerance=tolerance,
                               name=name, weights_in=weights_in,
                               weights_out=weights_out)
        residuals.append(rep.max_residual)
        if "plain_form_deviation" in rep.details:
            plains.append(rep.details["plain_form_deviation"])
    details = {"scale_target": scale}
    warn = None
    if plains:
        details["plain_form_deviation_max"] = float(np.max(plains))
        warn = (f"maps are conformally canonical: form scaled by {scale:.12g}, "
                f"plain-form deviation up to {np.max(plains):.3e}")
    return make_report(name, residuals, tolerance, warning=warn, details=details)


def stereo_symplectic_suite(params: KappaParams | None = None,
                            n_points: int = 100, seed: int = 1905, d: int = 3,
                            h: float = 1e-6,
                            tolerance: float = 1e-6) -> list[CheckReport]:
    """Symplecticity of the projection maps over a seeded batch of points.

    Four aggregated reports: forward, inverse, and (when params are given)
    the two deformed composites threaded through the realization. The
    composites stretch the canonical form by scale^2, so they are checked
    against the scaled target with the plain-form deviation flagged."""
    rng = np.random.default_rng(seed)
    reports = []
    flats = []
    while len(flats) < n_points:
        X = rng.uniform(-1.5, 1.5, size=d)
        Y = rng.uniform(-1.5, 1.5, size=d)
        if np.linalg.norm(Y) < 0.2:
            continue
        flats.append(PhasePoint(X, Y, Chart.COMMUTATIVE))

    def collect(name, per_point, scale=1.0):
        residuals = []
        plains = []
        for make in per_point:
            rep = make()
            residuals.append(rep.max_residual)
            if "plain_form_deviation" in rep.details:
                plains.append(rep.details["plain_form_deviation"])
        details = {"scale_target": scale, "n_points": n_points, "seed": seed}
        warn = None
        if plains:
            details["plain_form_deviation_max"] = float(np.max(plains))
            warn = (f"composite is conformally canonical: form scaled by "
                    f"{scale:.12g}, plain-form deviation up to "
                    f"{np.max(plains):.3e}")
        reports.append(make_report(name, residuals, tolerance,
                                   warning=warn, details=details))

    def fwd_check(pt):
        def run():
            base = stereo_inverse(pt)
            flat_fn, z0 = sphere_map_as_chart(
                lambda s: stereo_forward(s).flat(), base)
            return symplectic_check(flat_fn, z0, h=h, tolerance=tolerance)
        return run

    def inv_check(pt):
        def run():
            def fn(z):
                return stereo_inverse(
                    PhasePoint(z[:d], z[d:], Chart.COMMUTATIVE)).flat()
            return symplectic_check(fn, pt.flat(), h=h, tolerance=tolerance)
        return run

    collect("stereo:forward", [fwd_check(pt) for pt in flats])
    collect("stereo:inverse", [inv_check(pt) for pt in flats])

    if params is None:
        return reports
    lam2 = params.scale**2

    def kfwd_check(pt):
        def run():
            base = stereo_inverse(pt)

            def fn(s):
                return realize_spatial_inverse(
                    kappa_stereo_forward(s, params), params).flat()
            flat_fn, z0 = sphere_map_as_chart(fn, base)
            return symplectic_check(flat_fn, z0, h=h, scale=1.0 / lam2,
                                    tolerance=tolerance)
        return run

    def kinv_check(pt):
        def run():
            def fn(z):
                kpt = realize_spatial(
                    PhasePoint(z[:d], z[d:], Chart.COMMUTATIVE), params)
                return kappa_stereo_inverse(kpt, params).flat()
            return symplectic_check(fn, pt.flat(), h=h, scale=lam2,
                                    tolerance=tolerance)
        return run

    collect("stereo:kappa-forward-realized",
            [kfwd_check(pt) for pt in flats], scale=1.0 / lam2)
    collect("stereo:kappa-inverse-realized",
            [kinv_check(pt) for pt in flats], scale=lam2)
    return reports
