"""Ligon-Schaaf regularization: bound Kepler states to the punctured T*S^3.

For a bound state (q, p) of H = |p|^2/(2 mu) - c/|q| set

    nu = c * sqrt(mu / (-2H)),    theta = <q, p> / nu,

and build the moving orthonormal 4-frame

    A = ( qhat - <q,p> p / (mu c),  <q,p> / nu )
    B = ( |q| p / nu,               |q| |p|^2 / (mu c) - 1 ).

The regularized point is

    x = A sin(theta) + B cos(theta),    y = nu (-A cos(theta) + B sin(theta)),

which satisfies <x,x> = 1, <x,y> = 0, <y,y> = nu^2. The map sends the Kepler
flow to the uniform rotation generated by the Delaunay Hamiltonian
Htilde = -mu^2/(2<y,y>), run at c^2/mu times the physical rate (and exactly
at the physical rate when mu = c = 1). On the image, Htilde = mu H / c^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import (
    Collision,
    DegenerateFiber,
    InvalidParams,
    InvalidState,
    NoConvergence,
    PositiveEnergy,
    ZeroFiber,
)
from .integrators import IntegratorConfig, Trajectory
from .kepler import KeplerSystem, kepler_hamiltonian
from .kepler import circular_state, integrate_kepler_at_times, sample_bound_states
from .reporting import CheckReport, make_report

FIBER_GUARD = 1e-24     # <y,y> below this: hamiltonian refuses to evaluate
DEGENERACY_GUARD = 1e-12


@dataclass(frozen=True)
class DelaunayState:
    """Point of the punctured T*S^3: |x| = 1, <x,y> = 0, y != 0."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.size != y.size:
            raise InvalidState("x and y dimensions differ")
        if abs(np.linalg.norm(x) - 1.0) > 1e-10:
            raise InvalidState(f"|x| = {np.linalg.norm(x)!r} is not 1")
        if abs(float(np.dot(x, y))) > 1e-10:
            raise InvalidState(f"<x,y> = {float(np.dot(x, y))!r} is not 0")
        if float(np.dot(y, y)) == 0.0:
            raise InvalidState("y = 0: state is on the puncture")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def project(cls, x, y) -> "DelaunayState":
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        n = np.linalg.norm(x)
        if n == 0:
            raise InvalidState("cannot normalize the zero vector")
        x = x / n
        y = y - np.dot(x, y) * x
        return cls(x, y)

    @property
    def nu(self) -> float:
        return float(np.linalg.norm(self.y))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class LSFrame:
    """The moving frame and angle behind one forward evaluation.

    The full 4-vectors (a, a4) and (b, b4) are orthonormal, and
    nu = c sqrt(mu / (-2H)) ties the frame to the energy shell.
    """

    a: np.ndarray
    a4: float
    b: np.ndarray
    b4: float
    nu: float
    theta: float

    def a_full(self) -> np.ndarray:
        return np.append(self.a, self.a4)

    def b_full(self) -> np.ndarray:
        return np.append(self.b, self.b4)


def ls_forward(q, p, sys: KeplerSystem) -> tuple[DelaunayState, LSFrame]:
    """Regularize one bound state. Raises PositiveEnergy on H >= 0 and
    Collision inside the evaluation guard."""
    q = np.asarray(q, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    if q.size != 3 or p.size != 3:
        raise InvalidState("the regularization takes 3-dimensional states")
    H = kepler_hamiltonian(q, p, sys)
    if H >= 0.0:
        raise PositiveEnergy(f"H = {H:.6g} >= 0: state is not bound")
    mu, c = sys.mu_tilde, sys.c_tilde
    r = float(np.linalg.norm(q))
    qp = float(np.dot(q, p))
    nu = c * np.sqrt(mu / (-2.0 * H))
    theta = qp / nu

    a = q / r - qp * p / (mu * c)
    a4 = qp / nu
    b = r * p / nu
    b4 = r * float(np.dot(p, p)) / (mu * c) - 1.0

    sin_t, cos_t = np.sin(theta), np.cos(theta)
    a_vec = np.append(a, a4)
    b_vec = np.append(b, b4)
    x = a_vec * sin_t + b_vec * cos_t
    y = nu * (-a_vec * cos_t + b_vec * sin_t)
    return DelaunayState(x, y), LSFrame(a, a4, b, b4, float(nu), float(theta))


def delaunay_hamiltonian(state: DelaunayState, mu: float = 1.0) -> float:
    yy = float(np.dot(state.y, state.y))
    if yy < FIBER_GUARD:
        raise ZeroFiber(f"<y,y> = {yy:.3e} is below the fiber guard")
    return -mu * mu / (2.0 * yy)


def delaunay_rhs(x, y, mu: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    yy = float(np.dot(y, y))
    if yy < FIBER_GUARD:
        raise ZeroFiber(f"<y,y> = {yy:.3e} is below the fiber guard")
    mu2 = mu * mu
    return (mu2 / yy**2) * y, (-mu2 / yy) * x


def dirac_hamiltonian(x, y, mu: float = 1.0) -> float:
    """Constraint-extended energy, usable off the surface |x| = 1, <x,y> = 0:

        H* = -mu^2/(2Y) - <x,y>^2 + (mu^2 / (2Y)) (<x,x> - 1),   Y = <y,y>.

    On the surface it reduces to the Delaunay energy."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    yy = float(np.dot(y, y))
    if yy < FIBER_GUARD:
        raise ZeroFiber(f"<y,y> = {yy:.3e} is below the fiber guard")
    xy = float(np.dot(x, y))
    xx = float(np.dot(x, x))
    mu2 = mu * mu
    return -mu2 / (2.0 * yy) - xy * xy + 0.5 * (mu2 / yy) * (xx - 1.0)


def dirac_multipliers(x, y, mu: float = 1.0) -> dict[str, float]:
    """Multipliers of the two constraints as baked into dirac_hamiltonian."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    yy = float(np.dot(y, y))
    if yy < FIBER_GUARD:
        raise ZeroFiber(f"<y,y> = {yy:.3e} is below the fiber guard")
    return {"unit": 0.5 * mu * mu / yy, "tangency": -float(np.dot(x, y))}


def delaunay_closed_form(state: DelaunayState, mu: float, t) -> tuple[np.ndarray, np.ndarray]:
    """Exact Delaunay flow from an on-shell state: uniform rotation in the
    plane spanned by x0 and y0/|y0| at angular rate mu^2 / <y,y>^(3/2).

    t may be a scalar or an array; arrays give stacked (len(t), dim) outputs."""
    x0 = state.x
    nu = state.nu
    yhat = state.y / nu
    omega = mu * mu / nu**3
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ang = omega * t_arr
    cos_a, sin_a = np.cos(ang)[:, None], np.sin(ang)[:, None]
    x_t = cos_a * x0 + sin_a * yhat
    y_t = nu * (-sin_a * x0 + cos_a * yhat)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return x_t[0], y_t[0]
    return x_t, y_t


_BIV_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def bivector(x, y) -> np.ndarray:
    """The six components x_i y_j - x_j y_i (i < j) of the 4d wedge."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    return np.array([x[i] * y[j] - x[j] * y[i] for i, j in _BIV_PAIRS])


def integrate_delaunay(state: DelaunayState, mu: float, duration: float,
                       config: IntegratorConfig,
                       backend: str | None = None) -> Trajectory:
    """Run the constrained Delaunay flow with the rk4 kernel, attaching the
    constraint defects, the fiber norm, and the wedge components as
    invariant series."""
    if config.method != "rk4":
        raise InvalidParams("the Delaunay flow uses the rk4 method")
    if duration <= 0:
        raise InvalidParams("duration must be positive")
    n_steps = max(1, int(round(duration / config.step)))
    dt = duration / n_steps
    kern = _core.kernels_for(backend) if backend else _core
    t_arr, states, term, last = kern.delaunay_rk4(
        state.x, state.y, mu, dt, n_steps, project=config.projection)
    n1 = state.x.size
    xs, ys = states[:, :n1], states[:, n1:]
    unit_constraint = 0.5 * (np.sum(xs * xs, axis=1) - 1.0)
    tangency_constraint = np.sum(xs * ys, axis=1)
    fiber_norm = np.sum(ys * ys, axis=1)
    wedge = np.empty((states.shape[0], len(_BIV_PAIRS)))
    for col, (i, j) in enumerate(_BIV_PAIRS):
        wedge[:, col] = xs[:, i] * ys[:, j] - xs[:, j] * ys[:, i]
    cols = [f"x{i + 1}" for i in range(n1)] + [f"y{i + 1}" for i in range(n1)]
    traj = Trajectory(
        t_arr, states, cols, "delaunay",
        metadata={"termination": int(term), "last_step": float(last),
                  "method": "rk4", "param_name": "t", "mu": mu,
                  "config": config.to_dict()},
    )
    return traj.with_invariants(unit_constraint=unit_constraint,
                                tangency_constraint=tangency_constraint,
                                fiber_norm=fiber_norm, wedge=wedge)


def _identity_residuals(q, p, sys: KeplerSystem) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise residuals of the two bivector identities tying the
    regularized image to the Kepler conserved vectors:

        (1)  xtilde x ytilde = q x p
        (2)  x4*ytilde - y4*xtilde = nu*(qhat - p x (q x p)/(mu c)).

    These are exactly the spatial-spatial and spatial-fourth components of
    the wedge x^y, so together they identify x^y with the so(4) momenta."""
    q = np.asarray(q, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    state, frame = ls_forward(q, p, sys)
    x, y = state.x, state.y
    lhs1 = np.cross(x[:3], y[:3])
    rhs1 = np.cross(q, p)
    lhs2 = x[3] * y[:3] - y[3] * x[:3]
    qhat = q / np.linalg.norm(q)
    rhs2 = frame.nu * (qhat - np.cross(p, np.cross(q, p))
                       / (sys.mu_tilde * sys.c_tilde))
    return lhs1 - rhs1, lhs2 - rhs2


def intertwine_check(q, p, sys: KeplerSystem,
                     tolerance: float = 1e-10) -> CheckReport:
    """Verify at one bound state that the regularized image carries the
    Kepler so(4) momenta: the wedge x^y reproduces (q x p) in its
    spatial-spatial components and nu*(qhat - p x (q x p)/(mu c)) in its
    fourth-component row."""
    r1, r2 = _identity_residuals(q, p, sys)
    return make_report(
        "ligon-schaaf:intertwining", np.concatenate([r1, r2]), tolerance,
        details={"identity1_max": float(np.max(np.abs(r1))),
                 "identity2_max": float(np.max(np.abs(r2))),
                 "identity2_form": "nu*(qhat - p x (q x p)/(mu*c))"})


def flow_conjugacy_check(q, p, sys: KeplerSystem, t: float,
                         tolerance: float = 1e-6, n_checkpoints: int = 8,
                         h_sub: float = 5e-4) -> CheckReport:
    """Flow-then-regularize against regularize-then-flow.

    The Kepler flow is sampled at checkpoints over [0, t] and regularized;
    each image is compared against the Delaunay closed form at the angle it
    actually reached (the Delaunay time is detected, not asserted). The
    residual list combines that phase-space mismatch with the orbit labels
    <y,y> and x^y, which must stay fixed. The measured rotation rate and the
    expected (c^2/mu) * mu^2/nu^3 travel in the details."""
    if t <= 0:
        raise InvalidParams("t must be positive")
    state0, _ = ls_forward(q, p, sys)
    Y0 = float(np.dot(state0.y, state0.y))
    M0 = bivector(state0.x, state0.y)
    yhat0 = state0.y / state0.nu
    omega = sys.mu_tilde**2 / state0.nu**3
    times = np.linspace(t / n_checkpoints, t, n_checkpoints)
    kep = integrate_kepler_at_times(q, p, sys, times, h_sub=h_sub)
    images = []
    residuals = []
    angles = []
    for i in range(times.size):
        state_i, _ = ls_forward(kep[i, :3], kep[i, 3:], sys)
        images.append(state_i)
        residuals.append(float(np.dot(state_i.y, state_i.y)) - Y0)
        residuals.extend(bivector(state_i.x, state_i.y) - M0)
        angles.append(np.arctan2(float(np.dot(state_i.x, yhat0)),
                                 float(np.dot(state_i.x, state0.x))))
    angles = np.unwrap(np.concatenate([[0.0], angles]))
    tau = angles[1:] / omega
    x_d, y_d = delaunay_closed_form(state0, sys.mu_tilde, tau)
    for i, state_i in enumerate(images):
        residuals.append(float(np.max(np.abs(state_i.x - x_d[i]))))
        residuals.append(float(np.max(np.abs(state_i.y - y_d[i]))))
    full_times = np.concatenate([[0.0], times])
    meas_rate = float(np.polyfit(full_times, angles, 1)[0])
    expect_rate = sys.c_tilde**2 / sys.mu_tilde * omega
    rel_err = abs(meas_rate - expect_rate) / abs(expect_rate)
    warning = None
    if rel_err > 1e-6:
        warning = f"rotation rate off by relative {rel_err:.3e}"
    return make_report(
        "ligon-schaaf:flow-conjugacy", residuals, tolerance, warning=warning,
        details={"t": t, "n_checkpoints": n_checkpoints,
                 "measured_rate": meas_rate, "expected_rate": expect_rate,
                 "relative_rate_error": rel_err, "h_sub": h_sub})


def _solve_theta(x4: float, y4_over_nu: float) -> float:
    """Root of g(theta) = theta - x4 sin(theta) + (y4/nu) cos(theta) on
    [-1.5, 1.5]; g is nondecreasing there and the root is the frame angle."""
    def g(th: float) -> float:
        return th - x4 * np.sin(th) + y4_over_nu * np.cos(th)

    lo, hi = -1.5, 1.5
    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0 or g_hi < 0:
        raise InvalidState("frame angle bracket failed: state is off the image")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    th = 0.5 * (lo + hi)
    for _ in range(3):
        gp = 1.0 - x4 * np.cos(th) - y4_over_nu * np.sin(th)
        if gp <= 1e-14:
            break
        th = th - g(th) / gp
    return float(th)


def ls_inverse_closed(state: DelaunayState, sys: KeplerSystem) -> tuple[np.ndarray, np.ndarray]:
    """Exact inverse of ls_forward by frame reconstruction."""
    x, y = state.x, state.y
    nu = state.nu
    mu, c = sys.mu_tilde, sys.c_tilde
    theta = _solve_theta(float(x[3]), float(y[3]) / nu)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    a_vec = x * sin_t - (y / nu) * cos_t
    b_vec = x * cos_t + (y / nu) * sin_t
    b4 = float(b_vec[3])
    if 1.0 - b4 <= DEGENERACY_GUARD:
        raise DegenerateFiber(f"1 - B4 = {1.0 - b4:.3e}: state is on the collision fiber")
    r = nu * nu * (1.0 - b4) / (c * mu)
    p = nu * b_vec[:3] / r
    q_hat = a_vec[:3] + nu * theta * p / (mu * c)
    return r * q_hat, p


def ls_inverse(state: DelaunayState, sys: KeplerSystem, max_iter: int = 50,
               tol: float = 1e-11) -> tuple[np.ndarray, np.ndarray]:
    """Invert ls_forward by damped Gauss-Newton on the full residual map.

    The seed is the exact inverse of the undeformed system (the deformation
    moves mu and c continuously, so the commutative preimage is a good
    starting point); iteration then drives ls_forward(q, p) onto the target
    in the actual system. Raises DegenerateFiber near the collision fiber
    and NoConvergence if max_iter damped steps cannot reach tol."""
    seed_sys = sys
    if sys.params is not None and sys.params.a != 0.0:
        seed_sys = KeplerSystem.from_params(sys.params.with_a(0.0))
    q, p = ls_inverse_closed(state, seed_sys)
    target = state.flat()

    def residual(z: np.ndarray) -> np.ndarray:
        st, _ = ls_forward(z[:3], z[3:], sys)
        return st.flat() - target

    z = np.concatenate([q, p])
    f = residual(z)
    fh = 1e-6
    for _ in range(max_iter):
        if float(np.max(np.abs(f))) < tol:
            return z[:3].copy(), z[3:].copy()
        J = np.empty((8, 6))
        for k in range(6):
            zp, zm = z.copy(), z.copy()
            zp[k] += fh
            zm[k] -= fh
            J[:, k] = (residual(zp) - residual(zm)) / (2.0 * fh)
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        lam = 1.0
        base = float(np.linalg.norm(f))
        for _ in range(20):
            z_try = z + lam * step
            try:
                f_try = residual(z_try)
            except (PositiveEnergy, Collision):
                lam *= 0.5
                continue
            if float(np.linalg.norm(f_try)) < base:
                z, f = z_try, f_try
                break
            lam *= 0.5
        else:
            raise NoConvergence("damping stalled before reaching tolerance")
    if float(np.max(np.abs(f))) < tol:
        return z[:3].copy(), z[3:].copy()
    raise NoConvergence(f"residual {float(np.max(np.abs(f))):.3e} after {max_iter} iterations")


def intertwine_battery(sys: KeplerSystem, n_points: int = 200,
                       seed: int = 202,
                       tolerance: float = 1e-10) -> list[CheckReport]:
    """Run the two bivector identities over a sampled batch of bound states.

    Identity (1) matches the spatial wedge components against the angular
    momentum q x p; identity (2) matches the fourth-component row against
    the orthogonal Runge-Lenz combination nu*(qhat - p x (q x p)/(mu c))."""
    pts = sample_bound_states(n_points, seed=seed, sys=sys)
    res1: list[float] = []
    res2: list[float] = []
    for pt in pts:
        r1, r2 = _identity_residuals(pt.position, pt.momentum, sys)
        res1.extend(r1)
        res2.extend(r2)
    shared = {"n_points": n_points, "seed": seed}
    return [
        make_report("ligon-schaaf:wedge-angular-momentum", res1, tolerance,
                    details=shared),
        make_report("ligon-schaaf:wedge-runge-lenz", res2, tolerance,
                    details=dict(shared,
                                 form="nu*(qhat - p x (q x p)/(mu*c))")),
    ]


def constraint_battery(sys: KeplerSystem, n_points: int = 200,
                       seed: int = 303,
                       tolerance: float = 1e-10) -> list[CheckReport]:
    """Check the image constraints of ls_forward over a sampled batch:
    <x,x> = 1, <x,y> = 0, <y,y> = nu^2, frame orthonormality, and the
    energy match Htilde = mu H / c^2 (which collapses to Htilde = H in the
    undeformed unit-constant system)."""
    pts = sample_bound_states(n_points, seed=seed, sys=sys)
    unit: list[float] = []
    tang: list[float] = []
    fiber: list[float] = []
    energy: list[float] = []
    frame_res: list[float] = []
    for pt in pts:
        q, p = pt.position, pt.momentum
        state, frame = ls_forward(q, p, sys)
        unit.append(float(np.dot(state.x, state.x)) - 1.0)
        tang.append(float(np.dot(state.x, state.y)))
        fiber.append(float(np.dot(state.y, state.y)) - frame.nu**2)
        h = kepler_hamiltonian(q, p, sys)
        htil = delaunay_hamiltonian(state, sys.mu_tilde)
        energy.append(htil - sys.mu_tilde * h / sys.c_tilde**2)
        a_full, b_full = frame.a_full(), frame.b_full()
        frame_res.append(float(np.dot(a_full, a_full)) - 1.0)
        frame_res.append(float(np.dot(b_full, b_full)) - 1.0)
        frame_res.append(float(np.dot(a_full, b_full)))
    shared = {"n_points": n_points, "seed": seed}
    ratio = sys.mu_tilde / sys.c_tilde**2
    warning = None
    if abs(ratio - 1.0) > 1e-12:
        warning = (f"energy carries the factor mu/c^2 = {ratio:.6g}; "
                   "the plain match Htilde = H needs mu = c = 1")
    return [
        make_report("ligon-schaaf:constraint-unit-sphere", unit, tolerance,
                    details=shared),
        make_report("ligon-schaaf:constraint-tangency", tang, tolerance,
                    details=shared),
        make_report("ligon-schaaf:fiber-norm", fiber, tolerance,
                    details=shared),
        make_report("ligon-schaaf:energy-match", energy, tolerance,
                    warning=warning,
                    details=dict(shared, energy_ratio=ratio)),
        make_report("ligon-schaaf:frame-orthonormality", frame_res, tolerance,
                    details=shared),
    ]


def roundtrip_battery(sys: KeplerSystem, n_points: int = 50, seed: int = 404,
                      tolerance: float = 1e-8) -> CheckReport:
    """Map sampled bound states forward and invert back; report the worst
    componentwise phase-space mismatch."""
    pts = sample_bound_states(n_points, seed=seed, sys=sys)
    res: list[float] = []
    for pt in pts:
        state, _ = ls_forward(pt.position, pt.momentum, sys)
        q2, p2 = ls_inverse(state, sys)
        res.extend(q2 - pt.position)
        res.extend(p2 - pt.momentum)
    return make_report("ligon-schaaf:round-trip", res, tolerance,
                       details={"n_points": n_points, "seed": seed})


def conjugacy_battery(sys: KeplerSystem, t: float = 3.0,
                      tolerance: float = 1e-6,
                      h_sub: float = 5e-4) -> list[CheckReport]:
    """Flow conjugacy on two reference orbits: circular at r = 1 and an
    eccentricity-0.3 orbit started at perihelion."""
    reports = []
    q_c, p_c = circular_state(1.0, sys)
    rep = flow_conjugacy_check(q_c, p_c, sys, t, tolerance=tolerance,
                               h_sub=h_sub)
    rep.identity_name += "-circular"
    reports.append(rep)
    ecc = 0.3
    r_peri = 1.0 - ecc
    speed = np.sqrt(sys.mu_tilde * sys.c_tilde * (2.0 / r_peri - 1.0))
    q_e = np.array([r_peri, 0.0, 0.0])
    p_e = np.array([0.0, speed, 0.0])
    rep = flow_conjugacy_check(q_e, p_e, sys, t, tolerance=tolerance,
                               h_sub=h_sub)
    rep.identity_name += "-eccentric"
    reports.append(rep)
    return reports
