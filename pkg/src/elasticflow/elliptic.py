"""Complete and incomplete elliptic integrals and Jacobi elliptic functions.

Everything here is built on the arithmetic-geometric mean (AGM) and the
descending Landen (Gauss) transformation.  Only ``k**2`` enters the defining
integrals, so a negative modulus is treated as ``abs(k)``.

All functions accept a scalar modulus and scalar or array arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_EPS = 2.220446049250313e-16
_MAX_AGM = 40


class EllipticDomainError(ValueError):
    """Modulus outside the range supported by the requested function."""


@dataclass(frozen=True)
class JacobiTriple:
    """Jacobi elliptic functions at one or more arguments."""

    sn: np.ndarray | float
    cn: np.ndarray | float
    dn: np.ndarray | float
    am: np.ndarray | float


class EllipticMoments(NamedTuple):
    """Integrals of even powers of ``sn`` and ``cn`` over a quarter period."""

    I_sn2: float
    I_cn2: float
    I_sn4: float
    I_cn4: float


def _modulus(k: float, allow_one: bool = False) -> float:
    k = abs(float(k))
    if not math.isfinite(k) or k > 1.0 or (k == 1.0 and not allow_one):
        raise EllipticDomainError(f"modulus k={k!r} outside supported range")
    return k


def _agm(k: float):
    """AGM ladder started at (1, k', k).

    Returns ``(a, b, c, ratio)`` lists where ``ratio[n] = c[n] / k`` is
    tracked multiplicatively so that ``(K - E) / k**2`` stays accurate as
    ``k -> 0``.
    """
    a = [1.0]
    b = [math.sqrt((1.0 - k) * (1.0 + k))]
    c = [k]
    ratio = [1.0]
    for _ in range(_MAX_AGM):
        if c[-1] <= _EPS * a[-1]:
            break
        a1 = 0.5 * (a[-1] + b[-1])
        ratio.append(ratio[-1] * c[-1] / (4.0 * a1))
        c.append(c[-1] * c[-1] / (4.0 * a1))
        b.append(math.sqrt(a[-1] * b[-1]))
        a.append(a1)
    return a, b, c, ratio


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, ``0 <= |k| < 1``."""
    k = _modulus(k)
    a, _, _, _ = _agm(k)
    return math.pi / (2.0 * a[-1])


def _k_minus_e_over_k2(k: float, K: float, ratio) -> float:
    # (K - E)/k^2 = K * sum_n 2^(n-1) (c_n/k)^2
    s = 0.5
    for n in range(1, len(ratio)):
        s += 2.0 ** (n - 1) * ratio[n] ** 2
    return K * s


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind, ``0 <= |k| <= 1``."""
    k = _modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    a, _, _, ratio = _agm(k)
    K = math.pi / (2.0 * a[-1])
    return K - k * k * _k_minus_e_over_k2(k, K, ratio)


def complete_KE(k: float) -> tuple[float, float]:
    """Both complete integrals ``(K(k), E(k))`` from a single AGM ladder."""
    k = _modulus(k)
    a, _, _, ratio = _agm(k)
    K = math.pi / (2.0 * a[-1])
    return K, K - k * k * _k_minus_e_over_k2(k, K, ratio)


def _reduce_phase(phi):
    """Split ``phi = n*pi + r`` with ``r`` in ``[-pi/2, pi/2]``."""
    n = np.rint(phi / math.pi)
    return n, phi - n * math.pi


def _landen_phases(r, a, b):
    """Descending Landen phases for reduced amplitude ``r``."""
    phis = [r]
    phi = r
    for n in range(len(a) - 1):
        d = np.arctan2(b[n] * np.sin(phi), a[n] * np.cos(phi))
        # keep phi_{n+1} - phi_n on the same sheet as phi_n
        d = d + 2.0 * math.pi * np.rint((phi - d) / (2.0 * math.pi))
        phi = phi + d
        phis.append(phi)
    return phis


def incomplete_F(phi, k: float):
    """Incomplete elliptic integral of the first kind ``F(phi, k)``.

    Defined for every real ``phi``; ``F(phi + pi, k) = F(phi, k) + 2 K(k)``.
    """
    k = _modulus(k)
    phi = np.asarray(phi, dtype=float)
    a, b, _, _ = _agm(k)
    K = math.pi / (2.0 * a[-1])
    n, r = _reduce_phase(phi)
    phis = _landen_phases(r, a, b)
    N = len(a) - 1
    out = phis[-1] / (2.0**N * a[-1]) + 2.0 * n * K
    return out[()] if out.ndim == 0 else out


def incomplete_E(phi, k: float):
    """Incomplete elliptic integral of the second kind ``E(phi, k)``.

    ``k = 1`` is allowed, where ``E(phi, 1)`` reduces to a sine sum.
    """
    k = _modulus(k, allow_one=True)
    phi = np.asarray(phi, dtype=float)
    n, r = _reduce_phase(phi)
    if k == 1.0:
        out = np.sin(r) + 2.0 * n
        return out[()] if out.ndim == 0 else out
    a, b, c, ratio = _agm(k)
    K = math.pi / (2.0 * a[-1])
    E = K - k * k * _k_minus_e_over_k2(k, K, ratio)
    phis = _landen_phases(r, a, b)
    N = len(a) - 1
    F = phis[-1] / (2.0**N * a[-1])
    out = F * (E / K)
    for m in range(1, N + 1):
        out = out + c[m] * np.sin(phis[m])
    out = out + 2.0 * n * E
    return out[()] if out.ndim == 0 else out


def jacobi(s, k: float) -> JacobiTriple:
    """Jacobi amplitude and ``sn, cn, dn`` by descending Landen transformation."""
    k = _modulus(k)
    s = np.asarray(s, dtype=float)
    a, _, c, _ = _agm(k)
    N = len(a) - 1
    phi = (2.0**N * a[-1]) * s
    phis = [phi]
    for n in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[n] / a[n] * np.sin(phi)))
        phis.append(phi)
    am = phis[-1]
    sn = np.sin(am)
    cn = np.cos(am)
    # dn^2 = k'^2 + k^2 cn^2 is a sum of non-negative terms, free of the
    # 0/0 that cn / cos(phi_1 - phi_0) meets at odd multiples of K
    dn = np.sqrt((1.0 - k) * (1.0 + k) + k * k * cn * cn)

    def _out(v):
        return v[()] if np.ndim(v) == 0 else v

    return JacobiTriple(sn=_out(sn), cn=_out(cn), dn=_out(dn), am=_out(am))


def amplitude(s, k: float):
    """Jacobi amplitude ``AM(s, k)``, the inverse of ``F(., k)``."""
    return jacobi(s, k).am


# Series switchover for the quartic moments; below it the closed forms lose
# digits to cancellation of O(k^2) terms.
_SERIES_K = 0.4
_SERIES_TERMS = 48


def _wallis(p: int) -> float:
    # binom(2p, p) / 4^p, i.e. (2/pi) * int_0^{pi/2} sin^{2p}
    return math.comb(2 * p, p) / 4.0**p


def _sin_moment_series(n: int, k: float) -> float:
    """``int_0^{pi/2} sin^{2n}(psi) / sqrt(1 - k^2 sin^2 psi) dpsi`` as a series in ``k^2``."""
    m = k * k
    total = 0.0
    mj = 1.0
    for j in range(_SERIES_TERMS):
        term = _wallis(j) * _wallis(n + j) * mj
        total += term
        if term < 1e-18 * total:
            break
        mj *= m
    return 0.5 * math.pi * total


def elliptic_moments(k: float) -> EllipticMoments:
    """Integrals of ``sn^2, cn^2, sn^4, cn^4`` over ``[0, K(k)]``.

    For moderate and large ``k`` the standard closed forms in ``K`` and ``E``
    are used, with ``(K - E)/k^2`` taken from the AGM ladder.  For small ``k``
    the same quantities come from the binomial series of the integrand.
    """
    k = _modulus(k)
    if k == 0.0:
        q = 0.25 * math.pi
        return EllipticMoments(q, q, 3.0 * math.pi / 16.0, 3.0 * math.pi / 16.0)
    if k < _SERIES_K:
        J0 = complete_K(k)
        J1 = _sin_moment_series(1, k)
        J2 = _sin_moment_series(2, k)
        return EllipticMoments(J1, J0 - J1, J2, J0 - 2.0 * J1 + J2)
    a, _, _, ratio = _agm(k)
    K = math.pi / (2.0 * a[-1])
    D = _k_minus_e_over_k2(k, K, ratio)
    k2 = k * k
    G = (2.0 * D - K) / (3.0 * k2)
    I_sn2 = D
    I_cn2 = K - D
    I_sn4 = G + 2.0 * D / 3.0
    I_cn4 = K - 4.0 * D / 3.0 + G
    return EllipticMoments(I_sn2, I_cn2, I_sn4, I_cn4)


def cn_power_moment(p: int, k: float) -> float:
    """``int_0^{K(k)} cn^p(s, k) ds`` for even ``p`` by the standard reduction.

    Uses ``(m+1) k^2 C_{m+2} = m (2k^2 - 1) C_m + (m-1) k'^2 C_{m-2}``.
    """
    if p < 0 or p % 2:
        raise ValueError("p must be a non-negative even integer")
    k = _modulus(k)
    mom = elliptic_moments(k)
    table = {0: complete_K(k), 2: mom.I_cn2, 4: mom.I_cn4}
    if p in table:
        return table[p]
    if k < _SERIES_K:
        # cn^{2q} = (1 - sn^2)^q expanded against the sine-power series
        q = p // 2
        return sum(
            (-1) ** i * math.comb(q, i) * _sin_moment_series(i, k) for i in range(q + 1)
        )
    k2 = k * k
    kp2 = (1.0 - k) * (1.0 + k)
    prev, cur = table[2], table[4]
    for m in range(4, p, 2):
        nxt = (m * (2.0 * k2 - 1.0) * cur + (m - 1) * kp2 * prev) / ((m + 1) * k2)
        prev, cur = cur, nxt
    return cur
