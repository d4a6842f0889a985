"""Free-boundary elastic flow of open curves between parallel lines.

Submodules
----------
elliptic
    AGM / Landen implementations of elliptic integrals and Jacobi functions.
variational
    The quotient ``Q(k)`` over the maximiser branches, its maximum and the
    critical-profile integrals.
curves
    Discrete curves and generators for the initial data.
fem
    The semi-implicit finite element step, time loop and bisection driver.
diagnostics
    Discrete energies, monotonicity monitors, turning number, shape distance.
stability
    Quadratic form of the linearisation about the rectangular elastica.
"""

from .curves import DiscreteCurve
from .diagnostics import EnergyTrace, discrete_energy
from .fem import BandedSystem, FlowConfig, FlowState, run_flow, solve_y0, step
from .variational import QBranch, find_kmax, q_value

__all__ = [
    "BandedSystem",
    "DiscreteCurve",
    "EnergyTrace",
    "FlowConfig",
    "FlowState",
    "QBranch",
    "discrete_energy",
    "find_kmax",
    "q_value",
    "run_flow",
    "solve_y0",
    "step",
]

__version__ = "0.1.0"
