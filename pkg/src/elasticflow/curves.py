"""Piecewise-linear curves on a uniform partition of [-1, 1] and their generators.

A :class:`DiscreteCurve` stores nodal positions ``x`` and, optionally, the
nodal curvature vector ``y`` (so that ``kappa = y . nu``).  The generators
build the initial data used in the experiments: the perturbed critical
profile, Euler's rectangular elastica, half a lemniscate of Bernoulli and a
figure-eight made of segments and unit circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .elliptic import complete_KE, incomplete_E, jacobi

SQRT2 = math.sqrt(2.0)


class DegenerateCurveError(ValueError):
    """An element has (numerically) zero length."""


class RombergError(RuntimeError):
    pass


@dataclass
class DiscreteCurve:
    """Nodal data on ``rho_j = -1 + 2j/J``, ``j = 0..J``.

    ``x`` and ``y`` have shape ``(J + 1, 2)``.
    """

    x: np.ndarray
    y: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=float)
        if self.x.ndim != 2 or self.x.shape[1] != 2 or self.x.shape[0] < 2:
            raise ValueError(f"x must have shape (J+1, 2), got {self.x.shape}")
        if self.y is not None:
            self.y = np.ascontiguousarray(self.y, dtype=float)
            if self.y.shape != self.x.shape:
                raise ValueError("y must have the same shape as x")

    @property
    def J(self) -> int:
        return self.x.shape[0] - 1

    @property
    def h(self) -> float:
        return 2.0 / self.J

    @property
    def nodes(self) -> np.ndarray:
        return -1.0 + self.h * np.arange(self.J + 1)

    def element_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.x, axis=0).T)

    @property
    def length(self) -> float:
        return float(self.element_lengths().sum())

    def check(self, rel_tol: float = 1e-12) -> None:
        """Raise if the curve violates the immersion or boundary invariants."""
        ell = self.element_lengths()
        if not np.all(np.isfinite(ell)) or ell.min() <= rel_tol * ell.mean():
            j = int(np.argmin(ell))
            raise DegenerateCurveError(f"element {j} has length {ell[j]:.3e}")
        if self.y is not None and (self.y[0, 0] != 0.0 or self.y[-1, 0] != 0.0):
            raise ValueError("y . e1 must vanish at both end nodes")

    def copy(self) -> "DiscreteCurve":
        return DiscreteCurve(
            self.x.copy(), None if self.y is None else self.y.copy(), dict(self.meta)
        )

    def scaled(self, lam: float, shift=(0.0, 0.0)) -> "DiscreteCurve":
        """The curve ``x -> lam x + shift`` with ``y -> y / lam``."""
        y = None if self.y is None else self.y / lam
        return DiscreteCurve(lam * self.x + np.asarray(shift, float), y, dict(self.meta))


def _parameter_to_arclength(J: int, length: float) -> np.ndarray:
    return 0.5 * (1.0 + (-1.0 + 2.0 * np.arange(J + 1) / J)) * length


def _romberg_cells(f, edges: np.ndarray, tol: float, max_levels: int = 20) -> np.ndarray:
    """Romberg integral of vector-valued ``f`` over each cell of ``edges``.

    ``f`` maps an array of points to an array of shape ``(n, d)``.  All cells
    are refined together until every cell's extrapolation has settled to
    ``tol``.
    """
    a, b = edges[:-1], edges[1:]
    w = b - a
    fa, fb = f(a), f(b)
    T = 0.5 * w[:, None] * (fa + fb)
    rows = [[T]]
    for level in range(1, max_levels + 1):
        n = 2 ** (level - 1)
        offs = (np.arange(n) + 0.5) / n
        pts = a[:, None] + w[:, None] * offs[None, :]
        vals = f(pts.ravel()).reshape(pts.shape + (-1,))
        T = 0.5 * T + 0.5 * w[:, None] * vals.mean(axis=1)
        row = [T]
        for m in range(1, level + 1):
            prev = rows[-1][m - 1]
            row.append(row[m - 1] + (row[m - 1] - prev) / (4.0**m - 1.0))
        err = np.max(np.abs(row[-1] - rows[-1][-1]))
        rows.append(row)
        if level >= 2 and err <= tol:
            return row[-1]
    raise RombergError(f"Romberg did not reach tol={tol:g} in {max_levels} levels")


def critical_length(k: float = 0.71) -> float:
    K, _ = complete_KE(k)
    return 2.0 * K


def gen_critical(a: float, k: float = 0.71, J: int = 4096) -> DiscreteCurve:
    """Arclength-parametrised curve whose curvature is ``a cn(s, k)`` on ``[0, 2K(k)]``.

    Positions come from Romberg integration of the unit tangent
    ``(cos theta, sin theta)`` with
    ``theta(s) = (a/k) arctan(k sn(s,k) / dn(s,k))``, over the first half
    only; the second half follows from the point symmetry about the midpoint.
    ``y`` is the exact curvature vector at the nodes.
    """
    if a <= 0.0:
        raise ValueError("amplitude a must be positive")
    if J < 8 or J % 2:
        raise ValueError("J must be even and >= 8")
    L = critical_length(k)

    def theta(s):
        j = jacobi(s, k)
        return (a / k) * np.arctan(k * j.sn / j.dn)

    def tangent(s):
        th = theta(s)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    s = _parameter_to_arclength(J, L)
    half = J // 2
    # per-cell tolerance chosen so the accumulated error stays below 1e-12
    cells = _romberg_cells(tangent, s[: half + 1], tol=1e-12 / half)
    x = np.zeros((J + 1, 2))
    x[1 : half + 1] = np.cumsum(cells, axis=0)
    x[half + 1 :] = 2.0 * x[half] - x[half - 1 :: -1][: J - half]
    th = theta(s)
    u = a * jacobi(s, k).cn
    y = u[:, None] * np.stack([-np.sin(th), np.cos(th)], axis=-1)
    y[[0, -1], 0] = 0.0
    return DiscreteCurve(x, y, {"kind": "critical", "a": a, "k": k})


def rect_elastica_scale(m: int = 1) -> float:
    """``b = m (2E - K)`` at ``k = 1/sqrt2``: fits ``m`` half-periods between ``x = -1`` and ``x = 1``."""
    K, E = complete_KE(1.0 / SQRT2)
    return m * (2.0 * E - K)


def _elastica_xy(sigma: np.ndarray, b: float):
    """Arclength elastica at ``bs = sigma``: position, curvature vector, curvature."""
    k = 1.0 / SQRT2
    j = jacobi(sigma, k)
    g1 = (2.0 * incomplete_E(j.am, k) - sigma) / b
    g2 = -SQRT2 * j.cn / b
    y = b * np.stack([-2.0 * j.sn * j.cn * j.dn, SQRT2 * j.cn**3], axis=-1)
    kappa = SQRT2 * b * j.cn
    return np.stack([g1, g2], axis=-1), y, kappa


def gen_rect_elastica(m: int = 1, J: int = 4096, b: float | None = None) -> DiscreteCurve:
    """``m`` half-periods of Euler's rectangular elastica, ``k = 1/sqrt2``.

    With the default ``b = m (2E - K)`` the end points sit on ``x = -1`` and
    ``x = 1`` and the length is ``2K/(2E - K)``.  ``b = 1`` gives the
    unscaled profile of length ``2 m K``.
    """
    if m < 1 or J < 8:
        raise ValueError("need m >= 1 and J >= 8")
    K, _ = complete_KE(1.0 / SQRT2)
    centred = b is None
    if centred:
        b = rect_elastica_scale(m)
    L = 2.0 * m * K / b
    s = _parameter_to_arclength(J, L)
    x, y, _ = _elastica_xy(b * s, b)
    if centred:
        x[:, 0] -= 1.0
    y[[0, -1], 0] = 0.0
    return DiscreteCurve(x, y, {"kind": "elastica", "m": m, "b": b})


def elastica_curvature(curve_or_s, b: float = 1.0):
    """Exact curvature ``sqrt2 b cn(b s, 1/sqrt2)`` at arclength ``s``."""
    return SQRT2 * b * jacobi(b * np.asarray(curve_or_s), 1.0 / SQRT2).cn


def gen_elastica_period(J: int = 1024, b: float = 1.0) -> DiscreteCurve:
    """A full period of the rectangular elastica between two inflection points, turned upright.

    Arclength runs over ``[K, 5K] / b``; the curve is rotated by a quarter
    turn so that both ends have horizontal tangents and lie on the same
    vertical line ``x = 0``.  The curvature does not have vanishing
    derivative at the ends, so this is not a stationary state.
    """
    if J < 8 or J % 2:
        raise ValueError("J must be even and >= 8")
    K, _ = complete_KE(1.0 / SQRT2)
    s = K / b + _parameter_to_arclength(J, 4.0 * K / b)
    g, yv, _ = _elastica_xy(b * s, b)
    # rotate by -pi/2: (u, v) -> (v, -u)
    x = np.stack([g[:, 1], -g[:, 0]], axis=-1)
    y = np.stack([yv[:, 1], -yv[:, 0]], axis=-1)
    x -= x[0]
    x[-1, 0] = 0.0
    y[[0, -1], 0] = 0.0
    return DiscreteCurve(x, y, {"kind": "elastica-period", "b": b})


def lemniscate_half(rho: np.ndarray) -> np.ndarray:
    """Half a lemniscate of Bernoulli from ``(0, 1)`` through the origin to ``(0, -1)``."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty(rho.shape + (2,))
    neg = rho < 0
    t = np.where(neg, 1.0 + rho, 1.0 - rho)
    # sin(pi (1 - t) / 2) rather than cos(pi t / 2): exact zero at the crossing point
    r = np.sqrt(np.clip(np.sin(0.5 * math.pi * (1.0 - t)), 0.0, None))
    sx = r * np.sin(0.25 * math.pi * t)
    sy = r * np.cos(0.25 * math.pi * t)
    out[..., 0] = np.where(neg, -sx, sx)
    out[..., 1] = np.where(neg, sy, -sy)
    return out


def gen_lemniscate(J: int = 1024) -> DiscreteCurve:
    """Nodal sampling of :func:`lemniscate_half`; ``y`` is left for :func:`solve_y0`."""
    if J < 8 or J % 2:
        raise ValueError("J must be even and >= 8")
    rho = -1.0 + 2.0 * np.arange(J + 1) / J
    return DiscreteCurve(lemniscate_half(rho), None, {"kind": "lemniscate"})


def figure_eight_point(s: np.ndarray) -> np.ndarray:
    """Arclength parametrisation of the segment / circle / circle / segment figure-eight.

    Unit segment from the origin to ``(1, 0)``, the unit circle centred at
    ``(1, 1)`` counter-clockwise, the unit circle centred at ``(1, -1)``
    clockwise, then a unit segment to ``(2, 0)``.
    """
    s = np.asarray(s, dtype=float)
    tp = 2.0 * math.pi
    out = np.empty(s.shape + (2,))
    p1 = s <= 1.0
    p2 = (s > 1.0) & (s <= 1.0 + tp)
    p3 = (s > 1.0 + tp) & (s <= 1.0 + 2 * tp)
    p4 = s > 1.0 + 2 * tp
    out[p1] = np.stack([s[p1], 0.0 * s[p1]], axis=-1)
    t = s[p2] - 1.0
    out[p2] = np.stack([1.0 + np.sin(t), 1.0 - np.cos(t)], axis=-1)
    t = s[p3] - 1.0 - tp
    out[p3] = np.stack([1.0 + np.sin(t), -1.0 + np.cos(t)], axis=-1)
    t = s[p4] - 1.0 - 2 * tp
    out[p4] = np.stack([1.0 + t, 0.0 * t], axis=-1)
    return out


def gen_figure_eight(J: int = 1024) -> DiscreteCurve:
    """Figure-eight from two unit segments and two oppositely oriented unit circles."""
    if J < 16 or J % 4:
        raise ValueError("J must be divisible by 4 and >= 16")
    L = 2.0 + 4.0 * math.pi
    s = L * np.arange(J + 1) / J
    x = figure_eight_point(s)
    x[-1] = (2.0, 0.0)
    return DiscreteCurve(x, None, {"kind": "figure8"})


def gen_line(J: int = 1024, half_width: float = 1.0) -> DiscreteCurve:
    x = np.zeros((J + 1, 2))
    x[:, 0] = half_width * (-1.0 + 2.0 * np.arange(J + 1) / J)
    return DiscreteCurve(x, np.zeros_like(x), {"kind": "line"})


class Geometry(NamedTuple):
    tangents: np.ndarray  # (J, 2) unit element tangents
    lengths: np.ndarray  # (J,)
    normals: np.ndarray  # (J+1, 2) node normals
    kappa: np.ndarray | None  # (J+1,) y . nu


def geometry(curve: DiscreteCurve) -> Geometry:
    """Element tangents and lengths, node-averaged normals and nodal curvature."""
    d = np.diff(curve.x, axis=0)
    ell = np.hypot(d[:, 0], d[:, 1])
    if ell.min() <= 0.0:
        raise DegenerateCurveError(f"element {int(np.argmin(ell))} has zero length")
    tau = d / ell[:, None]
    avg = np.empty((curve.J + 1, 2))
    avg[0] = tau[0]
    avg[-1] = tau[-1]
    avg[1:-1] = tau[:-1] + tau[1:]
    nrm = np.hypot(avg[:, 0], avg[:, 1])
    # a cusp makes the average vanish; fall back to the incoming tangent
    bad = nrm < 1e-14
    if np.any(bad):
        idx = np.flatnonzero(bad)
        avg[idx] = tau[np.maximum(idx - 1, 0)]
        nrm[idx] = 1.0
    avg /= nrm[:, None]
    nu = np.stack([-avg[:, 1], avg[:, 0]], axis=-1)
    kappa = None if curve.y is None else np.einsum("ij,ij->i", curve.y, nu)
    return Geometry(tau, ell, nu, kappa)


def barycenter(curve: DiscreteCurve) -> np.ndarray:
    """Length-weighted barycentre of the polygon."""
    ell = curve.element_lengths()
    mid = 0.5 * (curve.x[1:] + curve.x[:-1])
    return (ell[:, None] * mid).sum(axis=0) / ell.sum()


def normalize(curve: DiscreteCurve) -> DiscreteCurve:
    """Translate the barycentre to the origin and rescale to unit length."""
    L = curve.length
    if L <= 0.0:
        raise DegenerateCurveError("curve has zero length")
    c = barycenter(curve)
    x = (curve.x - c) / L
    y = None if curve.y is None else curve.y * L
    return DiscreteCurve(x, y, dict(curve.meta))


# ---------------------------------------------------------------------------
# snapshot files


def write_snapshot(path, curve: DiscreteCurve, **meta) -> Path:
    """Write ``rho x1 x2 y1 y2`` rows with ``# key=value`` header lines."""
    path = Path(path)
    info = {"J": curve.J, **curve.meta, **meta}
    lines = [f"# {k}={v}" for k, v in info.items()]
    rho = curve.nodes
    for j in range(curve.J + 1):
        cols = [rho[j], curve.x[j, 0], curve.x[j, 1]]
        row = " ".join(f"{v:.17g}" for v in cols)
        if curve.y is not None:
            row += f" {curve.y[j, 0]:.17g} {curve.y[j, 1]:.17g}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_meta(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def read_snapshot(path) -> DiscreteCurve:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = _parse_meta(val.strip())
            continue
        rows.append([float(v) for v in line.split()])
    widths = {len(r) for r in rows}
    if widths not in ({3}, {5}):
        raise ValueError(f"snapshot rows must have 3 or 5 columns, found {sorted(widths)}")
    data = np.array(rows)
    meta.pop("J", None)
    y = data[:, 3:5] if data.shape[1] == 5 else None
    return DiscreteCurve(data[:, 1:3], y, meta)


__all__ = [
    "DiscreteCurve",
    "DegenerateCurveError",
    "Geometry",
    "barycenter",
    "critical_length",
    "elastica_curvature",
    "figure_eight_point",
    "gen_critical",
    "gen_elastica_period",
    "gen_figure_eight",
    "gen_lemniscate",
    "gen_line",
    "gen_rect_elastica",
    "geometry",
    "lemniscate_half",
    "normalize",
    "read_snapshot",
    "rect_elastica_scale",
    "write_snapshot",
]
