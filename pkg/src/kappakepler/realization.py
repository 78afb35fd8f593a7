"""Deformed phase-space realization in commutative variables.

The deformed coordinates (psi, phi) are expressed as functions of ordinary
canonical pairs. Two charts are provided:

* spatial: psi^i = x^i * (1 + alpha*a*p0), phi^i = p^i * (1 + alpha*a*p0),
  with the time-component momentum p0 frozen as a configuration scalar.
* full: the (d+1)-dimensional realization
      psi^mu = x^mu + alpha*x^mu*(a.p) + beta*(a.x)*p^mu + gamma*a^mu*(x.p)
      phi^mu = p^mu + (alpha+beta)*(a.p)*p^mu + gamma*a^mu*(p.p)
  with deformation vector a^mu = (a, 0, ..., 0), so (a.p) = a*p^0 and
  (a.x) = a*x^0 always; the (x.p) and (p.p) contractions follow the
  configured signature.

Setting a = 0 turns every map into the identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ChartMismatch, InvalidParams, InvalidState

SIGNATURES = ("euclidean", "+---", "-+++")


class Chart(Enum):
    COMMUTATIVE = "commutative"
    KAPPA = "kappa"
    KEPLER = "kepler"
    PULLED = "pulled"


@dataclass(frozen=True)
class KappaParams:
    """Deformation parameters.

    gamma is tied to alpha by gamma = alpha + 1; passing gamma explicitly is
    allowed but it must satisfy that constraint. p0 defaults to the mass m.
    The signature flag fixes both the metric used for the (x.p) and (p.p)
    contractions of the full realization and the sign of the time-pair
    Poisson weight ("-+++" gives {x^0, p^0} = -1; the other two give +1).
    """

    a: float = 0.0
    alpha: float = -1.0
    beta: float = 0.0
    m: float = 1.0
    C: float = 1.0
    p0: float | None = None
    gamma: float | None = None
    signature: str = "-+++"

    def __post_init__(self):
        if self.a < 0:
            raise InvalidParams(f"deformation scale a must be >= 0, got {self.a}")
        if self.m <= 0 or self.C <= 0:
            raise InvalidParams("m and C must be positive")
        if self.signature not in SIGNATURES:
            raise InvalidParams(f"signature must be one of {SIGNATURES}")
        if self.p0 is None:
            object.__setattr__(self, "p0", float(self.m))
        if self.gamma is None:
            object.__setattr__(self, "gamma", float(self.alpha) + 1.0)
        elif abs(self.gamma - (self.alpha + 1.0)) > 1e-12:
            raise InvalidParams(
                f"gamma must equal alpha + 1, got gamma={self.gamma}, alpha={self.alpha}"
            )
        if abs(self.scale) < 1e-14:
            raise InvalidParams("1 + alpha*a*p0 = 0: spatial realization degenerates")
        if 1.0 + self.a * self.alpha * self.m <= 0:
            raise InvalidParams("1 + alpha*a*m must be positive for a valid mass")

    @property
    def scale(self) -> float:
        """The common stretch factor 1 + alpha*a*p0 of the spatial chart."""
        return 1.0 + self.alpha * self.a * self.p0

    @property
    def mu_tilde(self) -> float:
        """Deformed mass m/(1 + alpha*a*m)."""
        return self.m / (1.0 + self.alpha * self.a * self.m)

    @property
    def c_tilde(self) -> float:
        """Deformed coupling C*(1 + alpha*a*p0)."""
        return self.C * (1.0 + self.alpha * self.a * self.p0)

    @property
    def time_weight(self) -> float:
        """Poisson weight of the (x^0, p^0) pair under the configured signature."""
        return -1.0 if self.signature == "-+++" else 1.0

    def to_json(self) -> str:
        return json.dumps(
            {"a": self.a, "alpha": self.alpha, "beta": self.beta,
             "p0": self.p0, "m": self.m, "C": self.C}
        )

    @classmethod
    def from_json(cls, text: str) -> "KappaParams":
        d = json.loads(text)
        return cls(a=d["a"], alpha=d["alpha"], beta=d.get("beta", 0.0),
                   m=d["m"], C=d["C"], p0=d.get("p0"))

    def with_a(self, a: float) -> "KappaParams":
        """Same configuration at a different deformation scale (p0 kept)."""
        return replace(self, a=a, gamma=None)


def _vec(x, d_expected=None) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    if d_expected is not None and v.size != d_expected:
        raise InvalidState(f"expected dimension {d_expected}, got {v.size}")
    return v


@dataclass(frozen=True)
class PhasePoint:
    """A (position, momentum) pair in d-dimensional flat phase space."""

    position: np.ndarray
    momentum: np.ndarray
    chart: Chart = Chart.COMMUTATIVE

    def __post_init__(self):
        pos = _vec(self.position)
        mom = _vec(self.momentum)
        if pos.size != mom.size:
            raise InvalidState("position and momentum dimensions differ")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(mom))):
            raise InvalidState("non-finite phase point")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "momentum", mom)

    @property
    def d(self) -> int:
        return self.position.size

    def require_chart(self, *charts: Chart) -> "PhasePoint":
        if self.chart not in charts:
            raise ChartMismatch(
                f"point is in chart {self.chart.value}, expected one of "
                f"{[c.value for c in charts]}"
            )
        return self

    def flat(self) -> np.ndarray:
        return np.concatenate([self.position, self.momentum])


@dataclass(frozen=True)
class FullPhasePoint:
    """Phase point with explicit time components x^0, p^0 at index 0."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = _vec(self.x)
        p = _vec(self.p, x.size)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.x.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    def spatial(self, chart: Chart = Chart.COMMUTATIVE) -> PhasePoint:
        return PhasePoint(self.x[1:], self.p[1:], chart)


def _metric_dot(u: np.ndarray, v: np.ndarray, signature: str) -> float:
    """Contraction of two (d+1)-vectors under the configured signature."""
    s = float(np.dot(u, v))
    if signature == "euclidean":
        return s
    tt = u[0] * v[0]
    if signature == "+---":
        return float(tt - (s - tt))
    return float(-tt + (s - tt))  # -+++


def realize_spatial(pt: PhasePoint, params: KappaParams) -> PhasePoint:
    """Deform a commutative spatial phase point: uniform stretch by params.scale."""
    pt.require_chart(Chart.COMMUTATIVE)
    lam = params.scale
    return PhasePoint(lam * pt.position, lam * pt.momentum, Chart.KAPPA)


def realize_spatial_inverse(pt: PhasePoint, params: KappaParams) -> PhasePoint:
    """Undo realize_spatial (divide by the stretch factor)."""
    pt.require_chart(Chart.KAPPA)
    lam = params.scale
    return PhasePoint(pt.position / lam, pt.momentum / lam, Chart.COMMUTATIVE)


def realize_full(fp: FullPhasePoint, params: KappaParams) -> FullPhasePoint:
    """Deform a full phase point, time components included."""
    x, p = fp.x, fp.p
    a_dot_p = params.a * p[0]
    a_dot_x = params.a * x[0]
    xp = _metric_dot(x, p, params.signature)
    pp = _metric_dot(p, p, params.signature)
    a_vec = np.zeros_like(x)
    a_vec[0] = params.a
    psi = x * (1.0 + params.alpha * a_dot_p) + params.beta * a_dot_x * p \
        + params.gamma * a_vec * xp
    phi = p * (1.0 + (params.alpha + params.beta) * a_dot_p) + params.gamma * a_vec * pp
    return FullPhasePoint(psi, phi)


def sample_phase_points(n: int, d: int, seed: int, chart: Chart = Chart.COMMUTATIVE,
                        momentum_floor: float = 0.1) -> list[PhasePoint]:
    """Seeded random phase points: components uniform in [-2, 2], momenta
    rejected while |p| < momentum_floor."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        pos = rng.uniform(-2.0, 2.0, size=d)
        mom = rng.uniform(-2.0, 2.0, size=d)
        if np.linalg.norm(mom) < momentum_floor:
            continue
        out.append(PhasePoint(pos, mom, chart))
    return out


def sample_full_points(n: int, d: int, seed: int,
                       momentum_floor: float = 0.1) -> list[FullPhasePoint]:
    """Seeded random full phase points ((d+1)-vectors with time components)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x = rng.uniform(-2.0, 2.0, size=d + 1)
        p = rng.uniform(-2.0, 2.0, size=d + 1)
        if np.linalg.norm(p) < momentum_floor:
            continue
        out.append(FullPhasePoint(x, p))
    return out
