"""Moser correspondence: sphere geodesics <-> Kepler orbits.

The chain runs
    T*S^d --(stereographic projection)--> (psi, phi) --(role swap)--> (q, p)
with q = phi and p = psi, so the stereographic image of the geodesic flow,
read with positions and momenta exchanged, is the Kepler flow on the energy
level H = -1/2 after the time reparametrization dt = |q| ds. The geodesic
must be traversed against its parameter (direction -1) for the swapped orbit
to run in forward physical time.

Energy bookkeeping on the (psi, phi) chart:
    pulled_back_energy  F = (|psi|^2 + 1)^2 |phi|^2 / 8   (the free sphere energy)
    rescaled_energy     G = (|psi|^2 + 1) |phi| / 2 - 1   (vanishes on F = 1/2)
    kepler energy       H = |psi|^2 / 2 - 1/|phi| = G/|phi| - 1/2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import (
    DegenerateParametrization,
    InvalidParams,
    MomentumCollision,
)
from .integrators import IntegratorConfig, Trajectory
from .realization import Chart, KappaParams, PhasePoint
from .reporting import CheckReport, make_report
from .stereo import SphereState, kappa_stereo_forward, kappa_stereo_inverse

MOMENTUM_GUARD = 1e-12


def sphere_hamiltonian(s: SphereState) -> float:
    """Free energy |u|^2 |v|^2 / 2 (on the constraint surface, |v|^2 / 2)."""
    return 0.5 * float(np.dot(s.u, s.u)) * float(np.dot(s.v, s.v))


def geodesic_rhs(s: SphereState, direction: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    v2 = float(np.dot(s.v, s.v))
    return direction * s.v, direction * (-v2 * s.u)


def pulled_back_energy(pt: PhasePoint) -> float:
    """Sphere energy expressed through the stereographic image."""
    pt.require_chart(Chart.KAPPA, Chart.COMMUTATIVE)
    psi2 = float(np.dot(pt.position, pt.position))
    phi2 = float(np.dot(pt.momentum, pt.momentum))
    return (psi2 + 1.0) ** 2 * phi2 / 8.0


def rescaled_energy(pt: PhasePoint) -> float:
    """G = (|psi|^2 + 1)|phi|/2 - 1; its zero set is the F = 1/2 level."""
    pt.require_chart(Chart.KAPPA, Chart.COMMUTATIVE)
    psi2 = float(np.dot(pt.position, pt.position))
    phi = float(np.linalg.norm(pt.momentum))
    return (psi2 + 1.0) * phi / 2.0 - 1.0


def moser_kepler_hamiltonian(pt: PhasePoint) -> float:
    """Kepler energy of the role-swapped point: |psi|^2/2 - 1/|phi|."""
    pt.require_chart(Chart.KAPPA, Chart.COMMUTATIVE)
    phi = float(np.linalg.norm(pt.momentum))
    if phi < MOMENTUM_GUARD:
        raise MomentumCollision(f"|phi| = {phi:.3e}: swapped state sits at the collision")
    return 0.5 * float(np.dot(pt.position, pt.position)) - 1.0 / phi


def role_swap(pt: PhasePoint) -> PhasePoint:
    """(psi, phi) -> (q, p) = (phi, psi)."""
    pt.require_chart(Chart.KAPPA, Chart.COMMUTATIVE)
    return PhasePoint(pt.momentum, pt.position, Chart.KEPLER)


def role_swap_inverse(pt: PhasePoint, chart: Chart = Chart.KAPPA) -> PhasePoint:
    """(q, p) -> (psi, phi) = (p, q)."""
    pt.require_chart(Chart.KEPLER)
    if chart not in (Chart.KAPPA, Chart.COMMUTATIVE):
        raise InvalidParams("role_swap_inverse lands in the kappa or commutative chart")
    return PhasePoint(pt.momentum, pt.position, chart)


@dataclass(frozen=True)
class MoserChain:
    """One point pushed through every stage of the correspondence."""

    sphere: SphereState
    stereo: PhasePoint
    kepler: PhasePoint
    sphere_energy: float
    pulled_back: float
    rescaled: float
    kepler_energy: float

    @classmethod
    def from_sphere(cls, s: SphereState, params: KappaParams | None = None) -> "MoserChain":
        pt = kappa_stereo_forward(s, params)
        return cls(
            sphere=s,
            stereo=pt,
            kepler=role_swap(pt),
            sphere_energy=sphere_hamiltonian(s),
            pulled_back=pulled_back_energy(pt),
            rescaled=rescaled_energy(pt),
            kepler_energy=moser_kepler_hamiltonian(pt),
        )

    @classmethod
    def from_kepler(cls, q, p, params: KappaParams | None = None) -> "MoserChain":
        pt = role_swap_inverse(PhasePoint(q, p, Chart.KEPLER))
        s = kappa_stereo_inverse(pt, params)
        return cls.from_sphere(s, params)


def reparametrize(param: np.ndarray, speeds: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral t(s) = int_0^s speed ds'."""
    param = np.asarray(param, dtype=float).ravel()
    speeds = np.asarray(speeds, dtype=float).ravel()
    if param.size != speeds.size or param.size < 2:
        raise InvalidParams("need matching param/speed arrays with >= 2 samples")
    if np.any(speeds <= 0.0) or not np.all(np.isfinite(speeds)):
        raise DegenerateParametrization("speed must stay positive and finite")
    incr = 0.5 * (speeds[1:] + speeds[:-1]) * np.diff(param)
    return np.concatenate([[0.0], np.cumsum(incr)])


def integrate_geodesic(s0: SphereState, duration: float, config: IntegratorConfig,
                       direction: float = 1.0, renorm: bool = False,
                       backend: str | None = None) -> Trajectory:
    """Run the geodesic flow with the implicit-midpoint kernel.

    Invariant series attached: the free energy F, the constraint defect
    |u| - 1, and the tangency defect <u, v>.
    """
    if config.method != "midpoint":
        raise InvalidParams("the geodesic flow uses the midpoint method")
    if duration <= 0:
        raise InvalidParams("duration must be positive")
    n_steps = max(1, int(round(duration / config.step)))
    dt = duration / n_steps
    kern = _core.kernels_for(backend) if backend else _core
    s_arr, states, term, last = kern.sphere_midpoint(
        s0.u, s0.v, dt, n_steps, direction=direction, renorm=renorm,
        project=config.projection)
    n1 = s0.u.size
    us, vs = states[:, :n1], states[:, n1:]
    F = 0.5 * np.sum(us * us, axis=1) * np.sum(vs * vs, axis=1)
    unit_defect = np.linalg.norm(us, axis=1) - 1.0
    tangency = np.sum(us * vs, axis=1)
    cols = [f"u{i + 1}" for i in range(n1)] + [f"v{i + 1}" for i in range(n1)]
    traj = Trajectory(
        s_arr, states, cols, "sphere",
        metadata={"termination": int(term), "last_step": float(last),
                  "method": "midpoint", "param_name": "s",
                  "direction": direction, "renormalized": renorm,
                  "config": config.to_dict()},
    )
    return traj.with_invariants(F=F, unit_defect=unit_defect, tangency=tangency)


def moser_pipeline(s0: SphereState, duration: float, step: float,
                   params: KappaParams | None = None, renorm: bool = True,
                   backend: str | None = None) -> Trajectory:
    """Geodesic run pushed through the full correspondence.

    duration and step are in the geodesic parameter s. The geodesic is
    integrated with direction -1 so the swapped orbit runs forward in
    physical time, the speed |v| is pinned to its initial value (an exact
    invariant of the flow), and each sample is mapped to a Kepler state.
    The returned trajectory is parametrized by the reconstructed physical
    time t(s) = int |q| ds; the geodesic parameter rides along in metadata.
    """
    config = IntegratorConfig(method="midpoint", step=step, projection=True)
    geo = integrate_geodesic(s0, duration, config, direction=-1.0,
                             renorm=renorm, backend=backend)
    n1 = s0.u.size
    n = geo.n_samples
    d = n1 - 1
    kstates = np.empty((n, 2 * d))
    speeds = np.empty(n)
    H = np.empty(n)
    G = np.empty(n)
    for i in range(n):
        state = SphereState(geo.states[i, :n1], geo.states[i, n1:])
        pt = kappa_stereo_forward(state, params)
        kstates[i, :d] = pt.momentum
        kstates[i, d:] = pt.position
        speeds[i] = float(np.linalg.norm(pt.momentum))
        H[i] = moser_kepler_hamiltonian(pt)
        G[i] = rescaled_energy(pt)
    t_a = reparametrize(geo.param, speeds)
    cols = [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    meta = {"termination": geo.termination, "param_name": "t",
            "geodesic_param": geo.param, "geodesic_step": duration / max(1, n - 1),
            "renormalized": renorm, "direction": -1.0}
    traj = Trajectory(t_a, kstates, cols, Chart.KEPLER.value, metadata=meta)
    return traj.with_invariants(H=H, rescaled_energy=G)


def great_circle_report(step: float = 1e-3, tolerance: float = 1e-6,
                        backend: str | None = None) -> CheckReport:
    """Integrate a unit-speed great circle for one period 2*pi and report
    how far the final state lands from the initial one."""
    s0 = SphereState(np.array([1.0, 0.0, 0.0, 0.0]),
                     np.array([0.0, 1.0, 0.0, 0.0]))
    config = IntegratorConfig(method="midpoint", step=step, projection=True)
    geo = integrate_geodesic(s0, 2.0 * np.pi, config, backend=backend)
    res = geo.states[-1] - geo.states[0]
    return make_report("moser:great-circle-period", res, tolerance,
                       details={"step": step, "duration": float(2.0 * np.pi)})


def pipeline_energy_report(traj: Trajectory, level: float = -0.5,
                           tolerance: float = 1e-7) -> CheckReport:
    """Report how far the Kepler energy snapshots of a pipeline run stray
    from the target level (the unit-speed correspondence sits at H = -1/2)."""
    res = np.asarray(traj.invariants["H"], dtype=float) - level
    return make_report("moser:pipeline-energy-level", res, tolerance,
                       details={"level": level,
                                "n_samples": int(res.size)})


def pipeline_vs_direct_report(traj: Trajectory, sys=None,
                              tolerance: float = 1e-5, h_sub: float = 5e-4,
                              radius_floor: float = 1e-3) -> CheckReport:
    """Compare a pipeline trajectory against direct integration of the same
    initial conditions, restricted to samples with radius above the floor
    (direct integration is meaningless through the collision)."""
    from .kepler import KeplerSystem, integrate_kepler_at_times

    if sys is None:
        sys = KeplerSystem()
    d = len(traj.columns) // 2
    q0 = traj.states[0, :d].copy()
    p0 = traj.states[0, d:].copy()
    times = np.asarray(traj.param, dtype=float)
    radii = np.linalg.norm(traj.states[:, :d], axis=1)
    keep = np.nonzero((radii > radius_floor) & (np.arange(times.size) > 0))[0]
    direct = integrate_kepler_at_times(q0, p0, sys, times[keep], h_sub=h_sub)
    res = (traj.states[keep] - direct).ravel()
    return make_report("moser:pipeline-vs-direct", res, tolerance,
                       details={"n_compared": int(keep.size),
                                "radius_floor": radius_floor,
                                "h_sub": h_sub})


def regularization_demo_report(q=None, p=None, duration: float = 10.0,
                               step: float = 1e-3, tolerance: float = 1e-8,
                               min_step: float = 1e-6,
                               backend: str | None = None) -> CheckReport:
    """Collision continuation demonstration on a zero-angular-momentum
    state: direct adaptive integration must fail (collision or minimum step
    reached) while the sphere-side pipeline completes the full duration with
    the geodesic invariants held below tolerance."""
    from .kepler import KeplerSystem, integrate_kepler

    if q is None:
        q = np.array([2.0, 0.0, 0.0])
    if p is None:
        p = np.array([0.0, 0.0, 0.0])
    sys = KeplerSystem()
    direct_cfg = IntegratorConfig(method="verlet", step=step, adaptive=True,
                                  min_step=min_step, tolerance=1e-8)
    direct = integrate_kepler(q, p, sys, duration, direct_cfg,
                              backend=backend)
    direct_failed = direct.termination in (_core.COLLISION, _core.MIN_STEP)

    chain = MoserChain.from_kepler(q, p)
    geo_cfg = IntegratorConfig(method="midpoint", step=step, projection=True)
    geo = integrate_geodesic(chain.sphere, duration, geo_cfg, direction=-1.0,
                             renorm=True, backend=backend)
    pipe = moser_pipeline(chain.sphere, duration, step, backend=backend)
    pipe_completed = (pipe.termination == _core.COMPLETED
                      and geo.termination == _core.COMPLETED)
    res = []
    for name in ("F", "unit_defect", "tangency"):
        series = np.asarray(geo.invariants[name], dtype=float)
        res.extend(series - series[0])
    rep = make_report(
        "moser:regularization-demo", res, tolerance,
        details={"direct_termination": direct.termination_name,
                 "pipeline_termination": pipe.termination_name,
                 "direct_samples": direct.n_samples,
                 "pipeline_samples": pipe.n_samples,
                 "direct_failed": direct_failed,
                 "pipeline_completed": pipe_completed})
    rep.passed = rep.passed and direct_failed and pipe_completed
    if not direct_failed:
        rep.warning = "direct integration unexpectedly completed"
    return rep
