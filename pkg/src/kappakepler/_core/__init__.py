"""Hot integration kernels with a compiled/pure-Python backend switch.

The compiled extension is preferred when importable; set the environment
variable KAPPAKEPLER_FORCE_FALLBACK=1 to force the pure numpy implementation
(useful for parity testing and as a safety hatch on platforms without a
compiler). Both backends implement identical stepping arithmetic.
"""

from __future__ import annotations

import os

from . import _fallback

COMPLETED = _fallback.COMPLETED
COLLISION = _fallback.COLLISION
MIN_STEP = _fallback.MIN_STEP
NONFINITE = _fallback.NONFINITE

_forced = os.environ.get("KAPPAKEPLER_FORCE_FALLBACK", "").strip().lower() not in (
    "", "0", "false", "no",
)

_compiled = None
if not _forced:
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback

BACKEND = "compiled" if _compiled is not None else "fallback"

kepler_verlet = _impl.kepler_verlet
kepler_rk4 = _impl.kepler_rk4
sphere_midpoint = _impl.sphere_midpoint
delaunay_rk4 = _impl.delaunay_rk4


def get_backend() -> str:
    return BACKEND


def available_backends() -> list[str]:
    out = ["fallback"]
    if _compiled is not None:
        out.insert(0, "compiled")
    return out


def kernels_for(backend: str):
    """Return the kernel module for an explicit backend name."""
    if backend == "fallback":
        return _fallback
    if backend == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available in this install")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")
