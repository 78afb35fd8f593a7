"""Integration drivers, trajectory containers, and drift reporting.

The hot loops for the four named flows live in the _core kernels (compiled
when available, numpy fallback otherwise). The generic `integrate` here is a
plain-python driver for arbitrary right-hand sides; it exists for flows that
are only ever run a handful of steps, such as cross-checks in pulled-back
charts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from ._core import COLLISION, COMPLETED, MIN_STEP, NONFINITE
from .errors import InvalidParams
from .reporting import CheckReport, _jsonable, dumps_precise, make_report

TERMINATION_NAMES = {
    COMPLETED: "completed",
    COLLISION: "collision",
    MIN_STEP: "min_step_reached",
    NONFINITE: "non_finite",
}

METHODS = ("verlet", "rk4", "midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepping policy shared by all drivers.

    step is the (initial) step size; with adaptive=True the kepler verlet
    driver halves it down to min_step whenever the per-step energy jump
    exceeds `tolerance`. projection toggles per-step constraint projection
    where the flow has a constraint manifold to hold.
    """

    method: str = "rk4"
    step: float = 1e-3
    adaptive: bool = False
    min_step: float = 1e-6
    projection: bool = True
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParams(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.step > self.min_step > 0.0):
            raise InvalidParams(
                f"need step > min_step > 0, got step={self.step}, min_step={self.min_step}"
            )
        if self.tolerance <= 0.0:
            raise InvalidParams("tolerance must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "step": self.step,
            "adaptive": self.adaptive,
            "min_step": self.min_step,
            "projection": self.projection,
            "tolerance": self.tolerance,
        }

    def with_(self, **kw) -> "IntegratorConfig":
        return replace(self, **kw)


@dataclass
class Trajectory:
    """Sampled flow: param is the curve parameter (time or arc parameter),
    states is (n_samples, dim), columns names the state components, and
    invariants holds per-sample conserved-quantity series keyed by name."""

    param: np.ndarray
    states: np.ndarray
    columns: list[str]
    chart: str = "commutative"
    invariants: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.param = np.asarray(self.param, dtype=float).ravel()
        self.states = np.asarray(self.states, dtype=float)
        self.chart = getattr(self.chart, "value", self.chart)
        if self.states.ndim != 2 or self.states.shape[0] != self.param.size:
            raise InvalidParams("states must be (n_samples, dim) matching param")
        if len(self.columns) != self.states.shape[1]:
            raise InvalidParams("columns must name every state component")

    @property
    def n_samples(self) -> int:
        return self.param.size

    @property
    def termination(self) -> int:
        return int(self.metadata.get("termination", COMPLETED))

    @property
    def termination_name(self) -> str:
        return TERMINATION_NAMES[self.termination]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def invariant_columns(self) -> list[tuple[str, np.ndarray]]:
        """Flatten invariant series to scalar columns (vector ones get an
        index suffix)."""
        cols = []
        for name, vals in self.invariants.items():
            arr = np.asarray(vals, dtype=float)
            if arr.ndim == 1:
                cols.append((name, arr))
            else:
                for j in range(arr.shape[1]):
                    cols.append((f"{name}{j + 1}", arr[:, j]))
        return cols

    def to_csv(self) -> str:
        param_name = self.metadata.get("param_name", "t")
        inv_cols = self.invariant_columns()
        buf = io.StringIO()
        buf.write(f"# chart: {self.chart}\n")
        header = [param_name] + list(self.columns) + [name for name, _ in inv_cols]
        buf.write(",".join(header) + "\n")
        for i in range(self.n_samples):
            row = [self.param[i]] + list(self.states[i]) + [c[i] for _, c in inv_cols]
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return dumps_precise(
            {
                "chart": self.chart,
                "param_name": self.metadata.get("param_name", "t"),
                "columns": list(self.columns),
                "param": self.param.tolist(),
                "states": self.states.tolist(),
                "invariants": {k: np.asarray(v).tolist() for k, v in self.invariants.items()},
                "metadata": _jsonable(self.metadata),
            }
        )

    def with_invariants(self, **series) -> "Trajectory":
        inv = dict(self.invariants)
        for name, vals in series.items():
            arr = np.asarray(vals, dtype=float)
            if arr.shape[0] != self.n_samples:
                raise InvalidParams(f"invariant {name!r} has wrong length")
            inv[name] = arr
        return Trajectory(self.param, self.states, self.columns, self.chart,
                          inv, dict(self.metadata))


def _default_columns(dim: int) -> list[str]:
    return [f"z{i + 1}" for i in range(dim)]


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], z0, duration: float,
              config: IntegratorConfig, separable=None, chart: str = "commutative",
              columns: list[str] | None = None) -> Trajectory:
    """Fixed-step driver for an arbitrary first-order field z' = rhs(t, z).

    method "verlet" needs separable=(mass, force) with z = (q, p),
    q' = p/mass, p' = force(q); the other methods use rhs directly.
    Adaptive stepping is only implemented by the dedicated kepler driver.
    """
    if config.adaptive:
        raise InvalidParams("generic integrate() is fixed-step; use the kepler driver "
                            "for adaptive stepping")
    z = np.array(z0, dtype=float).ravel()
    dim = z.size
    if duration <= 0:
        raise InvalidParams("duration must be positive")
    n_steps = max(1, int(round(duration / config.step)))
    dt = duration / n_steps

    if config.method == "verlet":
        if separable is None:
            raise InvalidParams("verlet needs separable=(mass, force)")
        mass, force = separable
        d = dim // 2
        if 2 * d != dim:
            raise InvalidParams("verlet state must split evenly into (q, p)")

    t_arr = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, dim))
    t_arr[0] = 0.0
    states[0] = z
    term = COMPLETED
    k = 0
    for k in range(1, n_steps + 1):
        t = (k - 1) * dt
        if config.method == "rk4":
            k1 = rhs(t, z)
            k2 = rhs(t + 0.5 * dt, z + 0.5 * dt * k1)
            k3 = rhs(t + 0.5 * dt, z + 0.5 * dt * k2)
            k4 = rhs(t + dt, z + dt * k3)
            z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        elif config.method == "midpoint":
            z_new = z + dt * rhs(t, z)
            for _ in range(25):
                z_next = z + dt * rhs(t + 0.5 * dt, 0.5 * (z + z_new))
                delta = float(np.max(np.abs(z_next - z_new)))
                z_new = z_next
                if delta < 1e-13:
                    break
            z = z_new
        else:  # verlet
            q, p = z[:d], z[d:]
            p_half = p + 0.5 * dt * force(q)
            q = q + (dt / mass) * p_half
            p = p_half + 0.5 * dt * force(q)
            z = np.concatenate([q, p])
        if not np.all(np.isfinite(z)):
            term = NONFINITE
            k -= 1
            break
        t_arr[k] = k * dt
        states[k] = z

    return Trajectory(
        t_arr[:k + 1].copy(), states[:k + 1].copy(),
        columns or _default_columns(dim), chart,
        metadata={"method": config.method, "step": dt, "termination": term,
                  "param_name": "t", "config": config.to_dict()},
    )


def drift_report(traj: Trajectory, invariant_fns: dict[str, Callable] | None = None,
                 tolerance: float = 1e-9, measure: str = "max") -> list[CheckReport]:
    """One CheckReport per invariant series: how far it wandered from its
    initial value along the trajectory.

    measure picks what is judged against the tolerance: "max" the worst
    excursion, "terminal" the final offset, "secular" the net linear trend
    over the run (a bounded oscillation has small secular drift even when
    its peak excursion is larger). All three travel in details.
    """
    if measure not in ("max", "terminal", "secular"):
        raise InvalidParams(f"unknown drift measure {measure!r}")
    series: dict[str, np.ndarray] = {k: np.asarray(v, dtype=float)
                                     for k, v in traj.invariants.items()}
    if invariant_fns:
        for name, fn in invariant_fns.items():
            series[name] = np.asarray([fn(row) for row in traj.states], dtype=float)
    if not series:
        raise InvalidParams("trajectory has no invariant series to report on")

    x = traj.param - traj.param[0]
    span = float(x[-1]) if x.size > 1 else 0.0
    denom = float(np.dot(x, x))
    reports = []
    for name, vals in series.items():
        signed = vals - vals[0]
        if signed.ndim == 1:
            dev = np.abs(signed)
            slope = float(np.dot(x, signed)) / denom if denom > 0 else 0.0
        else:
            dev = np.max(np.abs(signed.reshape(signed.shape[0], -1)), axis=1)
            flat = signed.reshape(signed.shape[0], -1)
            slopes = (x @ flat) / denom if denom > 0 else np.zeros(flat.shape[1])
            slope = float(np.max(np.abs(slopes)))
        max_drift = float(np.max(dev))
        terminal = float(dev[-1])
        secular = abs(slope * span)
        chosen = {"max": max_drift, "terminal": terminal, "secular": secular}[measure]
        reports.append(make_report(
            f"drift:{name}", [chosen], tolerance,
            details={"max_drift": max_drift, "terminal_drift": terminal,
                     "secular_drift": secular, "measure": measure,
                     "n_samples": int(dev.size), "span": span},
        ))
    return reports
