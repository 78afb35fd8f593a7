"""Deformed Kepler dynamics, sphere regularizations, and canonical-structure
verification.

The package covers one chain of classical mechanics, end to end, with every
structural identity checked numerically rather than assumed:

  * a one-parameter deformation of phase-space coordinates (a uniform
    stretch on the spatial chart, a time-coordinate mixing on the full
    chart) whose Poisson algebra is measured by finite differences;
  * the stereographic correspondence between sphere geodesics and Kepler
    orbits, including continuation through collision states;
  * the direct regularization of bound Kepler states onto the punctured
    cotangent bundle of the 3-sphere, intertwining the Kepler flow with a
    uniform rotation;
  * symplectic integrators (Verlet, implicit midpoint, RK4) with a compiled
    core and a pure-Python fallback selected at import time.

Every check returns a CheckReport; known scale discrepancies ride along as
warnings instead of being absorbed. The ``kappakepler`` command exposes the
same checks from the shell.
"""

from ._core import BACKEND, available_backends, get_backend
from .brackets import bracket_audit, fd_gradient, jacobi_residual, poisson_bracket
from .errors import (
    ChartMismatch,
    Collision,
    DegenerateFiber,
    DegenerateParametrization,
    InvalidParams,
    InvalidState,
    KappaKeplerError,
    MomentumCollision,
    NoConvergence,
    NonFiniteEvaluation,
    PoleSingularity,
    PositiveEnergy,
    ZeroFiber,
)
from .integrators import IntegratorConfig, Trajectory, drift_report, integrate
from .kepler import (
    ConservedSet,
    KeplerSystem,
    circular_period,
    circular_state,
    conserved_set,
    escape_momentum,
    integrate_kepler,
    integrate_kepler_at_times,
    kepler_hamiltonian,
    kepler_rhs,
    period_from_energy,
    sample_bound_states,
    so4_audit,
)
from .ligon_schaaf import (
    DelaunayState,
    LSFrame,
    bivector,
    conjugacy_battery,
    constraint_battery,
    delaunay_closed_form,
    delaunay_hamiltonian,
    delaunay_rhs,
    dirac_hamiltonian,
    dirac_multipliers,
    flow_conjugacy_check,
    integrate_delaunay,
    intertwine_battery,
    intertwine_check,
    ls_forward,
    ls_inverse,
    ls_inverse_closed,
    roundtrip_battery,
)
from .moser import (
    MoserChain,
    great_circle_report,
    integrate_geodesic,
    moser_kepler_hamiltonian,
    moser_pipeline,
    pipeline_energy_report,
    pipeline_vs_direct_report,
    pulled_back_energy,
    regularization_demo_report,
    reparametrize,
    rescaled_energy,
    role_swap,
    role_swap_inverse,
    sphere_hamiltonian,
)
from .realization import (
    Chart,
    FullPhasePoint,
    KappaParams,
    PhasePoint,
    realize_full,
    realize_spatial,
    realize_spatial_inverse,
    sample_full_points,
    sample_phase_points,
)
from .reporting import (
    CheckReport,
    all_passed,
    dumps_precise,
    make_report,
    reports_to_json,
)
from .stereo import (
    SphereState,
    kappa_stereo_forward,
    kappa_stereo_inverse,
    sphere_chart,
    sphere_chart_inverse,
    stereo_forward,
    stereo_inverse,
    stereo_symplectic_suite,
    symplectic_battery,
    symplectic_check,
)

__version__ = "0.1.0"
