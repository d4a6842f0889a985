"""Linear stability of the half-period rectangular elastica.

The linearised operator about the elastica ``kappa_0 = sqrt2 cn(s, 1/sqrt2)``
on ``[0, 2K]`` is

    L v = v'''' + (c2 v')' + c0 v,   c2 = 5 cn^2,   c0 = 3 - 5 cn^4,

with ``v' = v''' = 0`` at both ends.  Its quadratic form is
``B[v] = int v''^2 - c2 v'^2 + c0 v^2``.  A negative value of ``B`` on
some admissible mode shows that the elastica is linearly unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .elliptic import complete_K, elliptic_moments, jacobi

K_RECT = 1.0 / math.sqrt(2.0)
DEFAULT_PANELS = 2**14


class InadmissibleModeError(ValueError):
    pass


def half_period() -> float:
    """``2 K(1/sqrt2)``."""
    return 2.0 * complete_K(K_RECT)


def linearized_coefficients(s):
    """``(5 cn^2, 3 - 5 cn^4)`` at ``k = 1/sqrt2``."""
    cn = jacobi(s, K_RECT).cn
    c2 = 5.0 * cn * cn
    return c2, 3.0 - 5.0 * cn**4


@dataclass
class TestMode:
    """A variation sampled on a uniform grid of ``[0, 2K]`` with first and second derivatives."""

    __test__ = False  # not a pytest class

    name: str
    s: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray

    def check(self, tol: float = 1e-10) -> None:
        scale = max(1.0, float(np.abs(self.v).max()))
        worst = max(abs(self.dv[0]), abs(self.dv[-1])) / scale
        if worst > tol:
            raise InadmissibleModeError(f"mode {self.name!r} has end slope {worst:.3e}")

    @classmethod
    def from_functions(cls, name: str, v: Callable, dv: Callable, d2v: Callable, panels: int = DEFAULT_PANELS):
        s = np.linspace(0.0, half_period(), panels + 1)
        return cls(name, s, v(s), dv(s), d2v(s))

    @classmethod
    def from_samples(cls, name: str, v: np.ndarray):
        """Derivatives by fourth-order differences, using the even reflection at both ends."""
        n = v.size - 1
        if n < 8:
            raise ValueError("need at least 9 samples")
        s = np.linspace(0.0, half_period(), n + 1)
        hs = s[1] - s[0]
        # even extension is consistent with v' = v''' = 0 at the ends
        ext = np.concatenate([v[2:0:-1], v, v[-2:-4:-1]])
        dv = (ext[:-4] - 8 * ext[1:-3] + 8 * ext[3:-1] - ext[4:]) / (12.0 * hs)
        d2v = (-ext[:-4] + 16 * ext[1:-3] - 30 * ext[2:-2] + 16 * ext[3:-1] - ext[4:]) / (12.0 * hs * hs)
        dv[0] = dv[-1] = 0.0
        return cls(name, s, v.copy(), dv, d2v)


def cosine_mode(j: int, panels: int = DEFAULT_PANELS) -> TestMode:
    """``cos(j pi s / 2K)``; ``j = 0`` is the constant mode."""
    w = j * math.pi / half_period()
    return TestMode.from_functions(
        f"cos{j}",
        lambda s: np.cos(w * s),
        lambda s: -w * np.sin(w * s),
        lambda s: -w * w * np.cos(w * s),
        panels,
    )


def _simpson(f: np.ndarray, hs: float) -> float:
    n = f.size - 1
    if n % 2:
        raise ValueError("Simpson's rule needs an even number of panels")
    return hs / 3.0 * float(f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())


def bilinear_B(u: TestMode, w: TestMode) -> float:
    if u.s.shape != w.s.shape:
        raise ValueError("modes must share a grid")
    c2, c0 = linearized_coefficients(u.s)
    f = u.d2v * w.d2v - c2 * u.dv * w.dv + c0 * u.v * w.v
    return _simpson(f, u.s[1] - u.s[0])


def quad_form_B(mode: TestMode) -> float:
    """``B[v]`` by composite Simpson on the mode's grid."""
    mode.check()
    return bilinear_B(mode, mode)


def constant_mode_value() -> float:
    """Closed form of ``B[1] = 6K - 10 int_0^K cn^4``."""
    K = complete_K(K_RECT)
    return 6.0 * K - 10.0 * elliptic_moments(K_RECT).I_cn4


class RayleighResult(NamedTuple):
    min_eigenvalue: float
    eigenvalues: np.ndarray
    coefficients: np.ndarray


def rayleigh_minimum(modes) -> RayleighResult:
    """Minimum of ``B[v] / int v^2`` over the span of ``modes`` (generalised eigenproblem)."""
    n = len(modes)
    A = np.empty((n, n))
    M = np.empty((n, n))
    hs = modes[0].s[1] - modes[0].s[0]
    for i in range(n):
        for j in range(i, n):
            A[i, j] = A[j, i] = bilinear_B(modes[i], modes[j])
            M[i, j] = M[j, i] = _simpson(modes[i].v * modes[j].v, hs)
    lam, vec = scipy.linalg.eigh(A, M)
    return RayleighResult(float(lam[0]), lam, vec[:, 0])


def operator_form(mode: TestMode, points: int = 4096) -> float:
    """``int_0^{2K} v L_h v`` with ``L_h`` the fourth-order periodic difference operator.

    The mode is resampled on ``points`` intervals, reflected evenly to a
    ``4K``-periodic function (which encodes ``v' = v''' = 0``), and the
    resulting sum over the full period is halved.
    """
    L2 = half_period()
    s = np.linspace(0.0, L2, points + 1)
    v = np.interp(s, mode.s, mode.v) if mode.s.size != s.size else mode.v
    per = np.concatenate([v, v[-2:0:-1]])  # period 2 * points
    h = L2 / points
    sp = h * np.arange(per.size)

    def d1(f):
        return (np.roll(f, 2) - 8 * np.roll(f, 1) + 8 * np.roll(f, -1) - np.roll(f, -2)) / (12 * h)

    c2, c0 = linearized_coefficients(sp)
    Lv = d1(d1(d1(d1(per)))) + d1(c2 * d1(per)) + c0 * per
    return 0.5 * h * float(np.sum(per * Lv))


__all__ = [
    "InadmissibleModeError",
    "RayleighResult",
    "TestMode",
    "bilinear_B",
    "constant_mode_value",
    "cosine_mode",
    "half_period",
    "linearized_coefficients",
    "operator_form",
    "quad_form_B",
    "rayleigh_minimum",
]
