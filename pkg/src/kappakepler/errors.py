"""Exception types shared across the library.

Every domain failure raises a subclass of KappaKeplerError so callers (and the
CLI) can distinguish usage errors from numerical breakdown.
"""


class KappaKeplerError(Exception):
    """Base class for all library errors."""


class InvalidParams(KappaKeplerError):
    """Parameter set violates a construction invariant."""


class InvalidState(KappaKeplerError):
    """State vector violates a chart or manifold invariant."""


class ChartMismatch(KappaKeplerError):
    """Operation applied to a phase point in the wrong chart."""


class PoleSingularity(KappaKeplerError):
    """Projection evaluated too close to the puncture point of the sphere chart."""


class NonFiniteEvaluation(KappaKeplerError):
    """A numerical stencil or map produced a non-finite value."""


class Collision(KappaKeplerError):
    """Radial distance fell below the collision threshold."""


class MomentumCollision(KappaKeplerError):
    """|phi| ~ 0 in the swapped-role chart; the collision singularity in disguise."""


class PositiveEnergy(KappaKeplerError):
    """Operation defined only on the negative-energy (bound) region."""


class ZeroFiber(KappaKeplerError):
    """Fiber norm <y,y> too small for the sphere-side Hamiltonian."""


class DegenerateFiber(KappaKeplerError):
    """Inverse map requested on (or too near) the degenerate fiber."""


class DegenerateParametrization(KappaKeplerError):
    """Time reparametrization factor vanished along the trajectory."""


class NoConvergence(KappaKeplerError):
    """Iterative solver exhausted its iteration budget."""
