"""The sharp quartic interpolation inequality and its elliptic maximisers.

The candidate maximisers of ``int u^4 / (L int u^2 int u'^2)`` among
mean-zero Neumann functions form a one-parameter family of scaled ``cn``/``sn``
profiles indexed by the modulus ``k`` in ``(-1, 1)``, split into five cases:

=====  ==================  ==================================
case   modulus             profile
=====  ==================  ==================================
a      ``1/sqrt2 < k < 1``  ``2k/sqrt(2k^2-1) cn(s/sqrt(2k^2-1), k)``
b      ``k = 1/sqrt2``      ``sqrt2 cn(s, 1/sqrt2)``
c      ``0 < k < 1/sqrt2``  ``2k/sqrt(1-2k^2) cn(s/sqrt(1-2k^2), k)``
d      ``k = 0``            ``cos(s)``
e      ``-1 < k < 0``       ``2k/sqrt(k^2+1) sn(s/sqrt(k^2+1), -k)``
=====  ==================  ==================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np
from scipy.fft import dct, idst
from scipy.optimize import brentq

from .elliptic import complete_K, complete_KE, cn_power_moment, elliptic_moments, jacobi

SQRT_HALF = 1.0 / math.sqrt(2.0)
#: Reliable upper bound for the optimal constant, used by the inequality check.
C0_BOUND = 0.162278
_SNAP = 1e-12


class Case(str, Enum):
    a = "a"
    b = "b"
    c = "c"
    d = "d"
    e = "e"


@dataclass(frozen=True)
class QBranch:
    """One member of the maximiser family: its case tag and modulus."""

    case: Case
    k: float

    def __post_init__(self):
        ok = {
            Case.a: SQRT_HALF < self.k < 1.0,
            Case.b: self.k == SQRT_HALF,
            Case.c: 0.0 < self.k < SQRT_HALF,
            Case.d: self.k == 0.0,
            Case.e: -1.0 < self.k < 0.0,
        }[self.case]
        if not ok:
            raise ValueError(f"k={self.k} is not in the range of case {self.case.value}")

    @classmethod
    def for_modulus(cls, k: float) -> "QBranch":
        k = float(k)
        if not -1.0 < k < 1.0:
            raise ValueError(f"modulus k={k} outside (-1, 1)")
        if abs(k) < _SNAP:
            return cls(Case.d, 0.0)
        if abs(k - SQRT_HALF) < _SNAP:
            return cls(Case.b, SQRT_HALF)
        if k < 0.0:
            return cls(Case.e, k)
        return cls(Case.c if k < SQRT_HALF else Case.a, k)

    @property
    def scale(self) -> float:
        """Stretch factor ``sigma`` of the argument, ``u(s) = A f(s / sigma)``."""
        k = self.k
        return {
            Case.a: lambda: math.sqrt(2.0 * k * k - 1.0),
            Case.b: lambda: 1.0,
            Case.c: lambda: math.sqrt(1.0 - 2.0 * k * k),
            Case.d: lambda: 1.0,
            Case.e: lambda: math.sqrt(k * k + 1.0),
        }[self.case]()

    @property
    def half_period(self) -> float:
        """Length ``L~(k)`` of the interval on which the profile is mean-zero Neumann."""
        if self.case is Case.d:
            return math.pi
        return 2.0 * self.scale * complete_K(abs(self.k))

    def profile(self) -> tuple[Callable, Callable, float, float]:
        """``(u, u', s_start, s_end)`` for this branch."""
        k, sig = self.k, self.scale
        if self.case is Case.d:
            return np.cos, lambda s: -np.sin(s), 0.0, math.pi
        if self.case is Case.e:
            amp = 2.0 * k / sig
            kk = -k

            def u(s):
                return amp * jacobi(np.asarray(s) / sig, kk).sn

            def du(s):
                j = jacobi(np.asarray(s) / sig, kk)
                return amp / sig * j.cn * j.dn

            half = 0.5 * self.half_period
            return u, du, -half, half
        amp = 2.0 * k / sig if self.case is not Case.b else math.sqrt(2.0)

        def u(s):
            return amp * jacobi(np.asarray(s) / sig, k).cn

        def du(s):
            j = jacobi(np.asarray(s) / sig, k)
            return -amp / sig * j.sn * j.dn

        return u, du, 0.0, self.half_period


def _cn_combination(k: float):
    """``A = k^2 K - K + E`` and ``B = k^4 K - 5/3 k^2 K + 4/3 k^2 E + 2/3 K - 2/3 E``.

    Evaluated as ``k^2 int cn^2`` and ``k^4 int cn^4`` so they stay accurate
    near ``k = 0``.
    """
    mom = elliptic_moments(k)
    return k * k * mom.I_cn2, k**4 * mom.I_cn4, mom


def _q_cn_branch(k: float) -> float:
    K = complete_K(k)
    mom = elliptic_moments(k)
    # 8K A (1 + (1/2 - k^2) A/B) with A = k^2 C2, B = k^4 C4, divided through by k^2
    den = 8.0 * K * (k * k * mom.I_cn2 + (0.5 - k * k) * mom.I_cn2**2 / mom.I_cn4)
    return 1.0 / den


def _q_sn_branch(k: float) -> float:
    kk = abs(k)
    K = complete_K(kk)
    mom = elliptic_moments(kk)
    den = 8.0 * K * (-kk * kk * mom.I_sn2 + 0.5 * (1.0 + kk * kk) * mom.I_sn2**2 / mom.I_sn4)
    return 1.0 / den


def q_value(k: float, allow_endpoints: bool = False) -> float:
    """The quotient ``Q(k)`` over the five-case maximiser family.

    ``Q`` extends continuously to ``k = +-1`` with value zero; those endpoints
    are only accepted with ``allow_endpoints=True``.
    """
    k = float(k)
    if abs(k) >= 1.0:
        if allow_endpoints and abs(k) == 1.0:
            return 0.0
        raise ValueError(f"q_value needs |k| < 1, got {k}")
    br = QBranch.for_modulus(k)
    if br.case is Case.d:
        return 3.0 / (2.0 * math.pi**2)
    if br.case is Case.b:
        K, E = complete_KE(SQRT_HALF)
        return 1.0 / (4.0 * K * (2.0 * E - K))
    if br.case is Case.e:
        return _q_sn_branch(br.k)
    return _q_cn_branch(br.k)


# The closed forms exactly as they are usually printed; kept for cross-checks.


def q_case_a_closed_form(k: float) -> float:
    K, E = complete_KE(k)
    A = k * k * K - K + E
    B = k**4 * K - 5.0 / 3.0 * k * k * K + 4.0 / 3.0 * k * k * E + 2.0 / 3.0 * K - 2.0 / 3.0 * E
    return 1.0 / (8.0 * K * A) / (1.0 - (k * k - 0.5) * A / B)


def q_case_c_closed_form(k: float) -> float:
    K, E = complete_KE(k)
    A = k * k * K - K + E
    B = k**4 * K - 5.0 / 3.0 * k * k * K + 4.0 / 3.0 * k * k * E + 2.0 / 3.0 * K - 2.0 / 3.0 * E
    return 1.0 / (8.0 * K * A) / (1.0 + (0.5 - k * k) * A / B)


def q_case_e_closed_form(k: float) -> float:
    K, E = complete_KE(-k)
    S4 = k * k * K / 3.0 - 2.0 / 3.0 * k * k * E + 2.0 / 3.0 * K - 2.0 / 3.0 * E
    return 1.0 / (8.0 * K * (K - E)) / (-1.0 + 0.5 * (k * k + 1.0) * (K - E) / S4)


def q_tilde(k: float) -> float:
    """Modified quotient with the ``2 L~(k)`` term removed from the numerator (case a)."""
    k = float(k)
    if not SQRT_HALF < k < 1.0:
        raise ValueError(f"q_tilde needs 1/sqrt2 < k < 1, got {k}")
    K = complete_K(k)
    A, B, _ = _cn_combination(k)
    num = 1.0 - (2.0 * k * k - 1.0) ** 2 * K / (4.0 * B)
    return num / (8.0 * K * A) / (1.0 - (k * k - 0.5) * A / B)


def _log_derivative_terms(k: float):
    K, E = complete_KE(k)
    k2 = k * k
    kp2 = 1.0 - k2
    F1 = 8.0 * K * (E - kp2 * K)
    F2 = (kp2 * K + (2 * k2 - 1) * E) / (2 * kp2 * (2 - 3 * k2) * K + 4 * (2 * k2 - 1) * E)
    dF1 = 8.0 / (k * kp2) * (E - kp2 * K) ** 2 + 8.0 * k * K * K
    dF2 = (
        1.5
        * k
        * (kp2 * K * K + (2 * k2 - 1) * E * E - 2 * k2 * E * K)
        / (kp2 * (2 - 3 * k2) * K + 2 * (2 * k2 - 1) * E) ** 2
    )
    return F1, F2, dF1, dF2


def critical_equation_residual(k: float) -> float:
    """Left minus right side of the stationarity condition for ``1/Q = F1 F2``."""
    K, E = complete_KE(k)
    k2 = k * k
    kp2 = 1.0 - k2
    lhs = (K - E) / (k * (E - kp2 * K)) + E / (k * kp2 * K)
    rhs = (
        3.0
        * k
        * (-kp2 * K * K + 2 * k2 * E * K - (2 * k2 - 1) * E * E)
        / (((kp2 * (2 - 3 * k2) * K + 2 * (2 * k2 - 1) * E)) * (kp2 * K + (2 * k2 - 1) * E))
    )
    return lhs - rhs


class KMax(NamedTuple):
    k_max: float
    c0: float
    residual: float


def find_kmax(bracket: tuple[float, float] = (0.75, 0.97)) -> KMax:
    """Maximiser of ``Q`` on ``(1/sqrt2, 1)`` and the optimal constant."""

    def dlog(k):
        F1, F2, dF1, dF2 = _log_derivative_terms(k)
        return dF1 / F1 + dF2 / F2

    lo, hi = bracket
    if dlog(lo) * dlog(hi) > 0:
        raise RuntimeError(f"no sign change of d/dk log(1/Q) on [{lo}, {hi}]")
    k = brentq(dlog, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return KMax(k, q_value(k), critical_equation_residual(k))


@dataclass(frozen=True)
class Remark4Report:
    """Integrals of ``u = a cn(s, k)`` on ``[0, 2K(k)]`` with ``int u^2 = 2 pi / K``."""

    k: float
    a_star: float
    int_u2: float
    int_u4: float
    int_du2: float
    int_residual2: float
    lhs: float

    @property
    def length(self) -> float:
        return 2.0 * complete_K(self.k)


def critical_amplitude(k: float = 0.71) -> float:
    """Amplitude ``a`` making ``L int_0^L (a cn)^2 = 4 pi`` with ``L = 2K(k)``."""
    K, E = complete_KE(k)
    return math.sqrt(math.pi / (K * K - (K * K - E * K) / (k * k)))


def remark4_report(k: float = 0.71) -> Remark4Report:
    K, E = complete_KE(k)
    a = critical_amplitude(k)
    mom = elliptic_moments(k)
    k2 = k * k
    int_u2 = 2.0 * a * a * mom.I_cn2
    int_u4 = 2.0 * a**4 * mom.I_cn4
    int_du2 = 2.0 * a * a * (mom.I_sn2 - k2 * mom.I_sn4)
    # u'' + u^3/2 = alpha cn + beta cn^3
    alpha = a * (2.0 * k2 - 1.0)
    beta = 0.5 * a**3 - 2.0 * a * k2
    int_res = 2.0 * (
        alpha * alpha * mom.I_cn2
        + 2.0 * alpha * beta * mom.I_cn4
        + beta * beta * cn_power_moment(6, k)
    )
    L = 2.0 * K
    lhs = int_u2 * (-int_du2 + 0.5 * int_u4) - 2.0 * L * int_res
    return Remark4Report(k, a, int_u2, int_u4, int_du2, int_res, lhs)


class InequalityPreconditionError(ValueError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class InequalityCheck(NamedTuple):
    lhs4: float
    rhs: float
    holds: bool


def _one_sided_derivative(u: np.ndarray, h: float) -> tuple[float, float]:
    # 7-point one-sided stencil, sixth order
    w = np.array([-49 / 20, 6.0, -15 / 2, 20 / 3, -15 / 4, 6 / 5, -1 / 6])
    return float(w @ u[:7]) / h, float(-(w @ u[::-1][:7])) / h


def _trapezoid(f: np.ndarray, h: float) -> float:
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def verify_interpolation_inequality(
    u_samples, L: float, tol: float = 1e-8, c0: float = C0_BOUND
) -> InequalityCheck:
    """Check ``int u^4 <= c0 L int u^2 int u'^2`` for samples on a uniform grid.

    ``u_samples`` holds values at ``N >= 64`` equispaced points including both
    ends of ``[0, L]``.  Integrals use the trapezoidal rule and ``u'`` comes
    from a cosine-series derivative, both spectrally accurate for smooth
    data with vanishing end slopes.
    """
    u = np.asarray(u_samples, dtype=float)
    N = u.size
    if N < 64:
        raise ValueError(f"need at least 64 samples, got {N}")
    h = L / (N - 1)
    scale = float(np.max(np.abs(u)))
    if scale == 0.0:
        return InequalityCheck(0.0, 0.0, True)
    mean_res = abs(_trapezoid(u, h)) / (L * scale)
    if mean_res > tol:
        raise InequalityPreconditionError("samples are not mean-zero", mean_res)
    d0, d1 = _one_sided_derivative(u, h)
    neu_res = max(abs(d0), abs(d1)) * L / scale
    if neu_res > tol:
        raise InequalityPreconditionError("Neumann condition violated", neu_res)
    # DCT-I coefficients give u = sum a_n cos(n pi s / L)
    coef = dct(u, type=1) / (N - 1)
    n = np.arange(N)
    dcoef = -coef * n * math.pi / L
    du = np.zeros(N)
    # interior sine samples via DST-I of the differentiated coefficients
    du[1:-1] = idst(dcoef[1:-1], type=1) * (N - 1)
    lhs4 = _trapezoid(u**4, h)
    rhs = c0 * L * _trapezoid(u**2, h) * _trapezoid(du**2, h)
    return InequalityCheck(lhs4, rhs, lhs4 <= rhs + tol * rhs)
