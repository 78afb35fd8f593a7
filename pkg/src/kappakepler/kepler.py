"""Kepler problem with deformed mass and coupling, and its so(4) structure.

The deformation enters only through the effective constants mu = m/(1+alpha*a*m)
and c = C*(1+alpha*a*p0); the (q, p) chart itself stays canonical. Bound
orbits (H < 0) carry the conserved angular momentum L, the Runge-Lenz vector
A, its energy-rescaled companion B, and the two commuting rotor halves
U = (L+B)/2, V = (L-B)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .brackets import poisson_bracket
from .errors import (
    Collision,
    InvalidParams,
    InvalidState,
    NonFiniteEvaluation,
    PositiveEnergy,
)
from .integrators import IntegratorConfig, Trajectory
from .realization import Chart, KappaParams, PhasePoint
from .reporting import CheckReport, make_report

EVAL_GUARD = 1e-12           # |q| below this: hamiltonian refuses to evaluate
TRAJECTORY_COLLISION = 1e-6  # |q| below this: integration stops


@dataclass(frozen=True)
class KeplerSystem:
    """Effective one-body constants of H = |p|^2/(2 mu_tilde) - c_tilde/|q|."""

    mu_tilde: float = 1.0
    c_tilde: float = 1.0
    params: KappaParams | None = None

    def __post_init__(self):
        if self.mu_tilde <= 0 or self.c_tilde <= 0:
            raise InvalidParams("mu_tilde and c_tilde must be positive")

    @classmethod
    def from_params(cls, params: KappaParams) -> "KeplerSystem":
        return cls(params.mu_tilde, params.c_tilde, params)


@dataclass(frozen=True)
class ConservedSet:
    """Conserved quantities at one phase point. B, U, V exist only on bound
    states (H < 0); on unbound ones they are None."""

    H: float
    L: np.ndarray
    A: np.ndarray
    B: np.ndarray | None = None
    U: np.ndarray | None = None
    V: np.ndarray | None = None

    @property
    def bound(self) -> bool:
        return self.B is not None


def _qp(q, p) -> tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    if q.size != p.size:
        raise InvalidState("position and momentum dimensions differ")
    return q, p


def kepler_hamiltonian(q, p, sys: KeplerSystem) -> float:
    q, p = _qp(q, p)
    r = float(np.linalg.norm(q))
    if r < EVAL_GUARD:
        raise Collision(f"|q| = {r:.3e} is inside the evaluation guard")
    return float(np.dot(p, p)) / (2.0 * sys.mu_tilde) - sys.c_tilde / r


def kepler_rhs(q, p, sys: KeplerSystem) -> tuple[np.ndarray, np.ndarray]:
    q, p = _qp(q, p)
    r = float(np.linalg.norm(q))
    if r < EVAL_GUARD:
        raise Collision(f"|q| = {r:.3e} is inside the evaluation guard")
    return p / sys.mu_tilde, (-sys.c_tilde / r**3) * q


def kepler_flow_field(sys: KeplerSystem):
    """Flat-vector right-hand side (t, z) -> z' for the generic driver."""
    def rhs(t, z):
        d = z.size // 2
        dq, dp = kepler_rhs(z[:d], z[d:], sys)
        return np.concatenate([dq, dp])
    return rhs


def conserved_set(q, p, sys: KeplerSystem, require_bound: bool = False) -> ConservedSet:
    """H, L, A always; B = sqrt(mu/(-2H)) A and the rotor halves only when
    the state is bound."""
    q, p = _qp(q, p)
    if q.size != 3:
        raise InvalidState("conserved set is defined for 3-dimensional states")
    H = kepler_hamiltonian(q, p, sys)
    L = np.cross(q, p)
    r = float(np.linalg.norm(q))
    A = np.cross(p, L) / sys.mu_tilde - sys.c_tilde * q / r
    if H >= 0.0:
        if require_bound:
            raise PositiveEnergy(f"H = {H:.6g} >= 0: state is not bound")
        return ConservedSet(H, L, A)
    B = np.sqrt(sys.mu_tilde / (-2.0 * H)) * A
    return ConservedSet(H, L, A, B, (L + B) / 2.0, (L - B) / 2.0)


def escape_momentum(r: float, sys: KeplerSystem) -> float:
    """|p| at which H = 0 for a state at radius r."""
    return float(np.sqrt(2.0 * sys.mu_tilde * sys.c_tilde / r))


def circular_state(r: float, sys: KeplerSystem) -> tuple[np.ndarray, np.ndarray]:
    """Planar circular orbit of radius r, counterclockwise in the xy plane."""
    if r <= 0:
        raise InvalidParams("radius must be positive")
    p_mag = float(np.sqrt(sys.mu_tilde * sys.c_tilde / r))
    return np.array([r, 0.0, 0.0]), np.array([0.0, p_mag, 0.0])


def circular_period(r: float, sys: KeplerSystem) -> float:
    return float(2.0 * np.pi * np.sqrt(sys.mu_tilde * r**3 / sys.c_tilde))


def period_from_energy(H: float, sys: KeplerSystem) -> float:
    if H >= 0:
        raise PositiveEnergy("only bound states have a period")
    return float(2.0 * np.pi * sys.c_tilde * np.sqrt(sys.mu_tilde) * (-2.0 * H) ** -1.5)


def sample_bound_states(n: int, seed: int, sys: KeplerSystem,
                        energy_ceiling: float = -0.01) -> list[PhasePoint]:
    """Seeded random points on the bound region: radius in [0.5, 2], momentum
    below escape, energies rejected above the ceiling so (-2H) stays away
    from zero."""
    rng = np.random.default_rng(seed)
    out: list[PhasePoint] = []
    while len(out) < n:
        q_dir = rng.normal(size=3)
        q_dir /= np.linalg.norm(q_dir)
        r = rng.uniform(0.5, 2.0)
        q = r * q_dir
        p_dir = rng.normal(size=3)
        p_dir /= np.linalg.norm(p_dir)
        p = rng.uniform(0.3, 0.95) * escape_momentum(r, sys) * p_dir
        if kepler_hamiltonian(q, p, sys) > energy_ceiling:
            continue
        out.append(PhasePoint(q, p, Chart.KEPLER))
    return out


def _component(sys: KeplerSystem, which: str, idx: int):
    def f(q, p):
        cs = conserved_set(q, p, sys, require_bound=True)
        return float(getattr(cs, which)[idx])
    return f


_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_j, _i, _k] = -1.0


def so4_audit(sys: KeplerSystem, n_points: int = 40, seed: int = 7,
              h: float = 1e-5, tolerance: float = 1e-5) -> list[CheckReport]:
    """Verify the rotation-algebra closure of (L, B) and the split into two
    commuting halves, by numerical brackets at random bound states.

    Families checked (for all index pairs i, j):
        {L_i, L_j} = eps_ijk L_k      {L_i, B_j} = eps_ijk B_k
        {B_i, B_j} = eps_ijk L_k      {U_i, U_j} = eps_ijk U_k
        {V_i, V_j} = eps_ijk V_k      {U_i, V_j} = 0
    plus the Runge-Lenz norm identity |A|^2 = c^2 + 2 H |L|^2 / mu.
    """
    pts = sample_bound_states(n_points, seed, sys)
    families = [
        ("so4:LL-closure", "L", "L", "L"),
        ("so4:LB-vector", "L", "B", "B"),
        ("so4:BB-closure", "B", "B", "L"),
        ("so4:UU-closure", "U", "U", "U"),
        ("so4:VV-closure", "V", "V", "V"),
        ("so4:UV-commute", "U", "V", None),
    ]
    reports = []
    for name, left, right, expect in families:
        residuals = []
        for pt in pts:
            cs = conserved_set(pt.position, pt.momentum, sys, require_bound=True)
            target = getattr(cs, expect) if expect is not None else None
            for i in range(3):
                for j in range(3):
                    br = poisson_bracket(_component(sys, left, i),
                                         _component(sys, right, j), pt, h=h)
                    want = float(_EPS[i, j] @ target) if target is not None else 0.0
                    residuals.append(br - want)
        reports.append(make_report(name, residuals, tolerance,
                                   details={"n_points": n_points, "seed": seed}))

    norm_residuals = []
    for pt in pts:
        cs = conserved_set(pt.position, pt.momentum, sys, require_bound=True)
        want = sys.c_tilde**2 + 2.0 * cs.H * float(np.dot(cs.L, cs.L)) / sys.mu_tilde
        norm_residuals.append(float(np.dot(cs.A, cs.A)) - want)
    reports.append(make_report("so4:runge-lenz-norm", norm_residuals, tolerance,
                               details={"n_points": n_points, "seed": seed}))
    return reports


def _kepler_invariants(states: np.ndarray, sys: KeplerSystem) -> dict[str, np.ndarray]:
    d = states.shape[1] // 2
    qs, ps = states[:, :d], states[:, d:]
    r = np.linalg.norm(qs, axis=1)
    H = np.sum(ps * ps, axis=1) / (2.0 * sys.mu_tilde) - sys.c_tilde / r
    inv = {"H": H}
    if d == 3:
        L = np.cross(qs, ps)
        A = np.cross(ps, L) / sys.mu_tilde - sys.c_tilde * qs / r[:, None]
        inv["L"] = L
        inv["A"] = A
    return inv


def integrate_kepler(q0, p0, sys: KeplerSystem, duration: float,
                     config: IntegratorConfig,
                     backend: str | None = None) -> Trajectory:
    """Run the Kepler flow with a _core kernel and attach the conserved
    series H, L, A as trajectory invariants."""
    q0, p0 = _qp(q0, p0)
    if duration <= 0:
        raise InvalidParams("duration must be positive")
    n_steps = max(1, int(round(duration / config.step)))
    dt = duration / n_steps
    kern = _core.kernels_for(backend) if backend else _core
    if config.method == "verlet":
        t, states, term, last = kern.kepler_verlet(
            q0, p0, sys.mu_tilde, sys.c_tilde, dt, n_steps,
            adaptive=config.adaptive, min_step=config.min_step,
            energy_tol=config.tolerance, collision_radius=TRAJECTORY_COLLISION)
    elif config.method == "rk4":
        t, states, term, last = kern.kepler_rk4(
            q0, p0, sys.mu_tilde, sys.c_tilde, dt, n_steps,
            collision_radius=TRAJECTORY_COLLISION)
    else:
        raise InvalidParams("kepler flow supports methods 'verlet' and 'rk4'")
    d = q0.size
    cols = [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    traj = Trajectory(
        t, states, cols, Chart.KEPLER.value,
        metadata={"termination": int(term), "last_step": float(last),
                  "method": config.method, "param_name": "t",
                  "mu_tilde": sys.mu_tilde, "c_tilde": sys.c_tilde,
                  "config": config.to_dict()},
    )
    return traj.with_invariants(**_kepler_invariants(traj.states, sys))


def integrate_kepler_at_times(q0, p0, sys: KeplerSystem, times,
                              h_sub: float = 5e-4) -> np.ndarray:
    """States of the Kepler flow at the exact given times (increasing, first
    one >= 0), by segmented fixed-step integration that lands on each time.

    Used to compare an independently produced trajectory sample-by-sample.
    """
    q0, p0 = _qp(q0, p0)
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        raise InvalidParams("need at least one time")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise InvalidParams("times must be strictly increasing and nonnegative")
    d = q0.size
    out = np.empty((times.size, 2 * d))
    z = np.concatenate([q0, p0])
    t_cur = 0.0
    for idx, t_target in enumerate(times):
        gap = t_target - t_cur
        if gap > 0:
            n_sub = max(1, int(np.ceil(gap / h_sub)))
            _, seg, term, _ = _core.kepler_rk4(
                z[:d], z[d:], sys.mu_tilde, sys.c_tilde, gap / n_sub, n_sub,
                collision_radius=TRAJECTORY_COLLISION)
            if term == _core.COLLISION:
                raise Collision(f"collision before t = {t_target:.6g}")
            if term != _core.COMPLETED:
                raise NonFiniteEvaluation(f"flow became non-finite before t = {t_target:.6g}")
            z = seg[-1]
            t_cur = t_target
        out[idx] = z
    return out
