"""Check reports: the uniform result record for every numerical verification.

A CheckReport names the identity under test, how many points it was evaluated
at, the worst and mean residuals, the tolerance it was judged against, and the
verdict. Known, documented discrepancies travel in the `warning` field so they
are surfaced rather than silently absorbed into a pass.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

_FLOAT_MARK = "<<f17:"
_FLOAT_RE = re.compile(r'"<<f17:([^"]*)>>"')
_SPECIALS = {"inf": "Infinity", "-inf": "-Infinity", "nan": "NaN"}


def _mark_floats(obj):
    """Tag every float with its 17-significant-digit rendering."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, np.floating)):
        text = format(float(obj), ".17g")
        return f"{_FLOAT_MARK}{_SPECIALS.get(text, text)}>>"
    if isinstance(obj, dict):
        return {str(k): _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_mark_floats(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_precise(obj, indent: int | None = 2) -> str:
    """json.dumps with floats written to 17 significant digits."""
    return _FLOAT_RE.sub(r"\1", json.dumps(_mark_floats(obj), indent=indent))


@dataclass
class CheckReport:
    identity_name: str
    n_points: int
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool
    warning: str | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "identity_name": self.identity_name,
            "n_points": self.n_points,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.warning is not None:
            d["warning"] = self.warning
        if self.details:
            d["details"] = _jsonable(self.details)
        return d

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        s = (
            f"[{tag}] {self.identity_name}: max {self.max_residual:.3e} "
            f"mean {self.mean_residual:.3e} (tol {self.tolerance:.1e}, "
            f"{self.n_points} pts)"
        )
        if self.warning:
            s += f" WARN: {self.warning}"
        return s


def make_report(
    identity_name: str,
    residuals,
    tolerance: float,
    warning: str | None = None,
    details: dict[str, Any] | None = None,
) -> CheckReport:
    """Build a report from a flat collection of absolute residuals."""
    r = np.atleast_1d(np.asarray(residuals, dtype=float)).ravel()
    if r.size == 0:
        raise ValueError("empty residual set")
    max_r = float(np.max(np.abs(r)))
    mean_r = float(np.mean(np.abs(r)))
    return CheckReport(
        identity_name=identity_name,
        n_points=int(r.size),
        max_residual=max_r,
        mean_residual=mean_r,
        tolerance=float(tolerance),
        passed=bool(max_r < tolerance) and np.isfinite(max_r),
        warning=warning,
        details=dict(details or {}),
    )


def reports_to_json(reports: list[CheckReport], config: dict[str, Any] | None = None) -> str:
    """Serialize a report battery as a JSON array.

    When `config` is given it is echoed into every element so a report file is
    reproducible on its own.
    """
    rows = []
    for rep in reports:
        d = rep.to_dict()
        if config is not None:
            d["config"] = _jsonable(config)
        rows.append(d)
    return dumps_precise(rows)


def all_passed(reports: list[CheckReport]) -> bool:
    return all(r.passed for r in reports)


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
