"""Semi-implicit parametric finite elements for the free-boundary elastic flow.

Positions ``x`` and the curvature vector ``y = x_rr / |x_r|^2`` are
continuous piecewise-linear on a uniform partition of ``[-1, 1]``.  Each
time step solves one linear system for ``(x^{m+1}, y^{m+1})``.  The
constraints are that the end points slide vertically and that ``y . e1``
vanishes at the ends.

Two backends are available: numba-compiled loops with a hand-written banded
LU, and vectorised numpy assembly with ``scipy.linalg.solve_banded``.  The
default is chosen by :mod:`elasticflow._accel`.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import _kernels as kern
from ._accel import resolve_backend
from .curves import DegenerateCurveError, DiscreteCurve, gen_critical
from .diagnostics import EnergyTrace, discrete_energy

log = logging.getLogger(__name__)

DEGENERATE_RATIO = 1e-12
RESIDUAL_TOL = 1e-10
CONSISTENCY_DT_FACTOR = 0.2048


class FlowError(RuntimeError):
    """A time step failed; carries the step index and time."""

    def __init__(self, message: str, m: int = -1, t: float = float("nan")):
        super().__init__(f"{message} (step {m}, t={t:.6g})")
        self.m = m
        self.t = t


class InconsistentBracketError(ValueError):
    pass


@dataclass
class FlowConfig:
    """Time-stepping parameters.

    ``dt0`` is the fixed step, or the initial step when ``adaptive`` is set.
    In adaptive mode ``dt = dt0 (L / L0)^4``, limited to grow by at most
    ``dt_growth_cap`` per step.
    """

    J: int = 4096
    dt0: float = 1e-4
    t_end: float = 1.0
    adaptive: bool = False
    dt_growth_cap: float = 1.05
    snapshot_times: Sequence[float] = ()
    record_every: int = 1
    backend: str | None = None
    check_residual: bool = True

    def validate(self) -> "FlowConfig":
        if not (self.dt0 > 0.0 and math.isfinite(self.dt0)):
            raise ValueError(f"dt0 must be positive, got {self.dt0}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.J < 8:
            raise ValueError(f"J must be >= 8, got {self.J}")
        if self.dt_growth_cap < 1.0:
            raise ValueError("dt_growth_cap must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        resolve_backend(self.backend)
        return self


@dataclass
class FlowState:
    t: float
    m: int
    curve: DiscreteCurve


@dataclass
class BandedSystem:
    """Square banded system in row-compact storage ``band[i, l + j - i] = A[i, j]``."""

    band: np.ndarray
    rhs: np.ndarray
    lower: int = kern.HB
    upper: int = kern.HB

    @property
    def n(self) -> int:
        return self.band.shape[0]

    def matvec(self, v: np.ndarray, backend: str | None = None) -> np.ndarray:
        if resolve_backend(backend) == "numba":
            return kern.banded_matvec_numba(self.band, v)
        return kern.banded_matvec_numpy(self.band, v)

    def solve(self, backend: str | None = None) -> np.ndarray:
        if resolve_backend(backend) == "numba":
            return kern.banded_lu_solve_numba(self.band, self.rhs)
        return kern.banded_solve_numpy(self.band, self.rhs)

    def relative_residual(self, sol: np.ndarray, backend: str | None = None) -> float:
        """``||A sol - rhs||_inf / (||A||_inf ||sol||_inf + ||rhs||_inf)``."""
        if resolve_backend(backend) == "numba":
            return kern.relative_residual_numba(self.band, sol, self.rhs)
        r = self.matvec(sol, backend) - self.rhs
        normA = float(np.abs(self.band).sum(axis=1).max())
        scale = normA * float(np.abs(sol).max()) + float(np.abs(self.rhs).max())
        return float(np.abs(r).max()) / scale if scale > 0.0 else 0.0

    def dense(self) -> np.ndarray:
        n = self.n
        A = np.zeros((n, n))
        for i in range(n):
            for d in range(self.band.shape[1]):
                j = i + d - self.lower
                if 0 <= j < n:
                    A[i, j] = self.band[i, d]
        return A


def _check_elements(x: np.ndarray) -> None:
    ell = np.hypot(*np.diff(x, axis=0).T)
    if not np.all(np.isfinite(ell)):
        raise DegenerateCurveError("non-finite node positions")
    if ell.min() < DEGENERATE_RATIO * ell.mean():
        j = int(np.argmin(ell))
        raise DegenerateCurveError(f"element {j} degenerated (length {ell[j]:.3e})")


def _constraint_rows(J: int):
    rows = np.array([0, 2, 4 * J, 4 * J + 2], dtype=np.int64)
    return rows


def solve_y0(curve: DiscreteCurve) -> DiscreteCurve:
    """Discrete curvature vector of a polygon by the weighted-mass projection.

    Solves ``int y . xi |x_r|^2 + int x_r . xi_r = 0`` for all test functions
    whose first component vanishes at the ends, with ``y`` in the same space.
    """
    x = curve.x
    _check_elements(x)
    J = curve.J
    h = 2.0 / J
    a = np.diff(x, axis=0) / h
    q = np.einsum("ij,ij->i", a, a)
    diag = np.zeros(J + 1)
    diag[:-1] += q * h / 3.0
    diag[1:] += q * h / 3.0
    off = q * h / 6.0
    # -int x_r . phi_i' : element e contributes +a_e on its left node, -a_e on its right
    load = np.zeros((J + 1, 2))
    load[:-1] += a
    load[1:] -= a
    y = np.zeros((J + 1, 2))
    for comp, sl in ((0, slice(1, J)), (1, slice(0, J + 1))):
        d = diag[sl]
        o = off[sl.start : sl.start + d.size - 1]
        ab = np.zeros((2, d.size))
        ab[0, 1:] = o
        ab[1] = d
        rhs = load[sl, comp]
        sol = scipy.linalg.solveh_banded(ab, rhs)
        res = d * sol - rhs
        res[:-1] += o * sol[1:]
        res[1:] += o * sol[:-1]
        scale = np.abs(d).max() * np.abs(sol).max() + np.abs(rhs).max()
        if scale > 0 and np.abs(res).max() > 1e-12 * scale:
            raise FlowError("y0 projection residual too large")
        y[sl, comp] = sol
    return DiscreteCurve(x.copy(), y, dict(curve.meta))


def assemble_step(state: FlowState, dt: float, backend: str | None = None) -> BandedSystem:
    """Assemble the linear system of one semi-implicit step, constraints applied."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    curve = state.curve
    if curve.y is None:
        raise ValueError("state curve needs y")
    x, y = curve.x, curve.y
    _check_elements(x)
    J = curve.J
    be = resolve_backend(backend)
    rows = _constraint_rows(J)
    values = np.array([x[0, 0], 0.0, x[J, 0], 0.0])
    if be == "numba":
        n = 4 * (J + 1)
        band = np.zeros((n, kern.WIDTH))
        rhs = np.zeros(n)
        kern.assemble_numba(x, y, float(dt), kern.GAUSS_X, kern.GAUSS_W, band, rhs)
        kern.apply_constraints_numba(band, rhs, rows, values)
    else:
        band, rhs = kern.assemble_numpy(x, y, float(dt))
        kern.apply_constraints_loop(band, rhs, rows, values)
    return BandedSystem(band, rhs)


def step(state: FlowState, dt: float, backend: str | None = None, check_residual: bool = True) -> FlowState:
    """Advance one time step."""
    try:
        system = assemble_step(state, dt, backend)
        sol = system.solve(backend)
    except (ZeroDivisionError, np.linalg.LinAlgError) as exc:
        raise FlowError(f"singular step system: {exc}", state.m, state.t) from exc
    except DegenerateCurveError as exc:
        raise FlowError(str(exc), state.m, state.t) from exc
    if not np.all(np.isfinite(sol)):
        raise FlowError("non-finite solution", state.m, state.t)
    if check_residual:
        res = system.relative_residual(sol, backend)
        if res > RESIDUAL_TOL:
            raise FlowError(f"solver residual {res:.2e} exceeds {RESIDUAL_TOL:g}", state.m, state.t)
    u = sol.reshape(-1, 4)
    x = np.ascontiguousarray(u[:, 0:2])
    y = np.ascontiguousarray(u[:, 2:4])
    # the identity rows give these exactly; assign to remove roundoff
    x[0, 0] = state.curve.x[0, 0]
    x[-1, 0] = state.curve.x[-1, 0]
    y[0, 0] = 0.0
    y[-1, 0] = 0.0
    try:
        _check_elements(x)
    except DegenerateCurveError as exc:
        raise FlowError(str(exc), state.m + 1, state.t + dt) from exc
    return FlowState(state.t + dt, state.m + 1, DiscreteCurve(x, y, state.curve.meta))


@dataclass
class FlowResult:
    trace: EnergyTrace
    snapshots: dict
    final: FlowState
    stopped_early: bool = False


def run_flow(
    config: FlowConfig,
    initial: DiscreteCurve,
    stop_when: Callable[[FlowState, EnergyTrace], bool] | None = None,
    max_steps: int | None = None,
) -> FlowResult:
    """Step from ``initial`` until ``t >= t_end``.

    Diagnostics are recorded every ``record_every`` steps and at the final
    step.  Snapshots are taken at the step nearest to each requested time.
    ``stop_when`` is evaluated after every recorded step and ends the run
    early when it returns true.
    """
    config.validate()
    if initial.J != config.J:
        raise ValueError(f"initial curve has J={initial.J}, config J={config.J}")
    curve = initial if initial.y is not None else solve_y0(initial)
    state = FlowState(0.0, 0, curve)
    trace = EnergyTrace()
    trace.record(0.0, curve, 0.0)
    pending = sorted(float(t) for t in config.snapshot_times)
    snaps: dict = {}
    while pending and pending[0] <= 0.0:
        snaps[pending.pop(0)] = state
    L0 = trace.length[0]
    dt_prev = config.dt0
    t_tol = 1e-12 * config.t_end
    stopped = False
    while state.t < config.t_end - t_tol:
        if max_steps is not None and state.m >= max_steps:
            break
        if config.adaptive:
            L = trace.length[-1] if config.record_every == 1 else state.curve.length
            dt = min(config.dt0 * (L / L0) ** 4, config.dt_growth_cap * dt_prev)
        else:
            dt = config.dt0
        prev = state
        state = step(state, dt, config.backend, config.check_residual)
        if not config.adaptive:
            state.t = state.m * config.dt0
        dt_prev = dt
        while pending and state.t >= pending[0] - t_tol:
            ts = pending.pop(0)
            snaps[ts] = state if abs(state.t - ts) <= abs(prev.t - ts) else prev
        last = state.t >= config.t_end - t_tol
        if state.m % config.record_every == 0 or last:
            try:
                trace.record(state.t, state.curve, dt)
            except DegenerateCurveError as exc:
                raise FlowError(str(exc), state.m, state.t) from exc
            if stop_when is not None and stop_when(state, trace):
                stopped = True
                break
    return FlowResult(trace, snaps, state, stopped)


class Fate(str, enum.Enum):
    LINE = "Line"
    GROWS = "Grows"
    UNDECIDED = "Undecided"


LINE_THRESHOLD = 0.05
GROW_THRESHOLD = 1.02


def classify_fate(trace: EnergyTrace) -> Fate:
    """Line if ``Ehat/2pi`` ever drops below 0.05, Grows if it ends above 1.02 while increasing."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    r = trace.array("Ehat") / (2.0 * math.pi)
    if np.any(r < LINE_THRESHOLD):
        return Fate.LINE
    tail = r[int(math.floor(0.9 * (r.size - 1))) :]
    if r[-1] > GROW_THRESHOLD and tail.size >= 2 and np.all(np.diff(tail) > 0.0):
        return Fate.GROWS
    return Fate.UNDECIDED


def _decided(state: FlowState, trace: EnergyTrace, grow_stop: float) -> bool:
    r = trace.Ehat[-1] / (2.0 * math.pi)
    if r < LINE_THRESHOLD:
        return True
    if r > grow_stop and len(trace) >= 3:
        return trace.Ehat[-1] > trace.Ehat[-2] > trace.Ehat[-3]
    return False


@dataclass
class Probe:
    a: float
    ehat0_ratio: float
    fate: Fate
    t_final: float
    steps: int


@dataclass
class BisectionResult:
    a_lo: float
    a_hi: float
    probes: list = field(default_factory=list)

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.a_lo, self.a_hi)


def probe_amplitude(
    a: float,
    J: int,
    dt: float,
    t_max: float,
    k: float = 0.71,
    backend: str | None = None,
    grow_stop: float = 1.05,
    record_every: int = 10,
) -> Probe:
    """Run the flow from the critical-profile curve with amplitude ``a`` and classify it.

    The run stops as soon as the outcome is clear; an undecided run is
    extended once to four times ``t_max``.
    """
    curve = gen_critical(a, k, J)
    ratio0 = discrete_energy(curve).Ehat / (2.0 * math.pi)
    fate = Fate.UNDECIDED
    total_t, total_m = 0.0, 0
    state_curve = curve
    for horizon in (t_max, 4.0 * t_max):
        cfg = FlowConfig(J=J, dt0=dt, t_end=horizon - total_t, record_every=record_every, backend=backend)
        res = run_flow(cfg, state_curve, stop_when=lambda s, tr: _decided(s, tr, grow_stop))
        total_t += res.final.t
        total_m += res.final.m
        fate = classify_fate(res.trace)
        log.info("probe a=%.8f horizon=%g fate=%s t=%.4g", a, horizon, fate.value, total_t)
        if fate is not Fate.UNDECIDED:
            break
        state_curve = res.final.curve
    return Probe(a, ratio0, fate, total_t, total_m)


def bisect_critical_amplitude(
    J: int,
    dt: float | None = None,
    a_lo: float = 1.40,
    a_hi: float = 1.50,
    t_max: float = 100.0,
    resolution: float = 1e-4,
    k: float = 0.71,
    backend: str | None = None,
    check_endpoints: bool = True,
    callback: Callable[[Probe], None] | None = None,
) -> BisectionResult:
    """Bracket the amplitude separating flows to a line from growing flows.

    Bisection runs on the grid of multiples of ``resolution``, so the final
    bracket is two adjacent grid values.  ``dt=None`` uses ``0.2048 h``.
    """
    if not a_lo < a_hi:
        raise InconsistentBracketError(f"need a_lo < a_hi, got ({a_lo}, {a_hi})")
    if resolution >= a_hi - a_lo:
        return BisectionResult(a_lo, a_hi)
    if dt is None:
        dt = CONSISTENCY_DT_FACTOR * 2.0 / J
    result = BisectionResult(a_lo, a_hi)

    def run(a):
        p = probe_amplitude(a, J, dt, t_max, k, backend)
        result.probes.append(p)
        if callback is not None:
            callback(p)
        return p.fate

    if check_endpoints:
        f_lo, f_hi = run(a_lo), run(a_hi)
        if f_lo is not Fate.LINE or f_hi is not Fate.GROWS:
            raise InconsistentBracketError(
                f"endpoint fates {f_lo.value} at {a_lo}, {f_hi.value} at {a_hi}"
            )
    lo = math.ceil(a_lo / resolution - 1e-9)
    hi = math.floor(a_hi / resolution + 1e-9)
    grid_lo, grid_hi = a_lo, a_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        a_mid = round(mid * resolution, 12)
        fate = run(a_mid)
        if fate is Fate.LINE:
            lo, grid_lo = mid, a_mid
        elif fate is Fate.GROWS:
            hi, grid_hi = mid, a_mid
        else:
            raise FlowError(f"probe at a={a_mid} stayed undecided up to t={4 * t_max:g}")
    result.a_lo, result.a_hi = grid_lo, grid_hi
    return result


__all__ = [
    "BandedSystem",
    "BisectionResult",
    "Fate",
    "FlowConfig",
    "FlowError",
    "FlowResult",
    "FlowState",
    "InconsistentBracketError",
    "Probe",
    "assemble_step",
    "bisect_critical_amplitude",
    "classify_fate",
    "probe_amplitude",
    "run_flow",
    "solve_y0",
    "step",
]
