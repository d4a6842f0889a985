"""Discrete energies, monotonicity monitors, turning number and shape metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .curves import DegenerateCurveError, DiscreteCurve, geometry, normalize

TRACE_COLUMNS = ("t", "length", "E", "Ehat", "int_ks2", "int_k4", "dt")


class Energy(NamedTuple):
    E: float
    Ehat: float
    length: float


class MonotonicityReport(NamedTuple):
    int_ks2: float
    int_k4: float
    lhs_ok: bool

    @property
    def length_rate(self) -> float:
        """Discrete analogue of ``dL/dt = -int k_s^2 + int k^4 / 2``."""
        return -self.int_ks2 + 0.5 * self.int_k4


def _require_y(curve: DiscreteCurve) -> np.ndarray:
    if curve.y is None:
        raise ValueError("curve has no curvature vector y; call solve_y0 first")
    return curve.y


def discrete_energy(curve: DiscreteCurve) -> Energy:
    """Bending energy of the normal part of ``y``, its scale-invariant version and the length.

    On each element ``x_rho`` is constant, so ``|P y|^2 = (y . n_e)^2`` is a
    quadratic in the element coordinate and is integrated exactly.
    """
    y = _require_y(curve)
    d = np.diff(curve.x, axis=0)
    ell = np.hypot(d[:, 0], d[:, 1])
    if ell.min() <= 0.0:
        raise DegenerateCurveError(f"element {int(np.argmin(ell))} has zero length")
    n = np.stack([-d[:, 1], d[:, 0]], axis=-1) / ell[:, None]
    p0 = np.einsum("ij,ij->i", y[:-1], n)
    p1 = np.einsum("ij,ij->i", y[1:], n)
    E = 0.5 * float(np.sum(ell * (p0 * p0 + p0 * p1 + p1 * p1) / 3.0))
    L = float(ell.sum())
    return Energy(E, E * L, L)


def monotonicity_report(curve: DiscreteCurve) -> MonotonicityReport:
    """``int kappa_s^2 ds`` and ``int kappa^4 ds`` from nodal curvature, and the sufficient condition."""
    _require_y(curve)
    g = geometry(curve)
    k = g.kappa
    ell = g.lengths
    k4 = k**4
    int_k4 = float(np.sum(0.5 * ell * (k4[:-1] + k4[1:])))
    int_ks2 = float(np.sum(np.diff(k) ** 2 / ell))
    return MonotonicityReport(int_ks2, int_k4, int_k4 <= 2.0 * int_ks2)


def turning_number(curve: DiscreteCurve) -> float:
    """Sum of signed exterior angles divided by ``2 pi``."""
    d = np.diff(curve.x, axis=0)
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    dot = np.einsum("ij,ij->i", d[:-1], d[1:])
    return float(np.sum(np.arctan2(cross, dot)) / (2.0 * math.pi))


def _point_to_polyline(points: np.ndarray, poly: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Distance from each point to the nearest segment of ``poly``."""
    a = poly[:-1]
    ab = poly[1:] - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2 = np.where(ab2 > 0.0, ab2, 1.0)
    out = np.empty(points.shape[0])
    for lo in range(0, points.shape[0], chunk):
        p = points[lo : lo + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", ap, ab) / ab2, 0.0, 1.0)
        diff = ap - t[..., None] * ab[None]
        out[lo : lo + chunk] = np.sqrt(np.min(np.einsum("pij,pij->pi", diff, diff), axis=1))
    return out


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines given by their vertices."""
    return float(max(_point_to_polyline(a, b).max(), _point_to_polyline(b, a).max()))


_REFLECTIONS = (np.array([1.0, 1.0]), np.array([-1.0, 1.0]), np.array([1.0, -1.0]), np.array([-1.0, -1.0]))


def shape_distance(a: DiscreteCurve, b: DiscreteCurve, reflect: bool = True, max_shift: float = 0.25) -> float:
    """Hausdorff distance of the length-normalised shapes.

    Both curves are normalised to unit length about their barycentres.  The
    distance is then minimised over a vertical shift of ``b`` in
    ``[-max_shift, max_shift]`` and, if ``reflect``, over reflections in
    the coordinate axes.
    """
    xa = normalize(a).x
    xb0 = normalize(b).x
    best = math.inf
    for sgn in _REFLECTIONS if reflect else _REFLECTIONS[:1]:
        xb = xb0 * sgn

        def cost(c):
            return hausdorff(xa, xb + np.array([0.0, c]))

        d0 = cost(0.0)
        res = minimize_scalar(cost, bounds=(-max_shift, max_shift), method="bounded", options={"xatol": 1e-10})
        best = min(best, d0, float(res.fun))
    return best


@dataclass
class EnergyTrace:
    """Time series of the discrete energies and monotonicity quantities."""

    t: list = field(default_factory=list)
    length: list = field(default_factory=list)
    E: list = field(default_factory=list)
    Ehat: list = field(default_factory=list)
    int_ks2: list = field(default_factory=list)
    int_k4: list = field(default_factory=list)
    dt: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def record(self, t: float, curve: DiscreteCurve, dt: float = 0.0) -> None:
        if self.t and t <= self.t[-1]:
            raise ValueError(f"trace times must increase: {t} after {self.t[-1]}")
        en = discrete_energy(curve)
        mono = monotonicity_report(curve)
        self.t.append(float(t))
        self.length.append(en.length)
        self.E.append(en.E)
        self.Ehat.append(en.Ehat)
        self.int_ks2.append(mono.int_ks2)
        self.int_k4.append(mono.int_k4)
        self.dt.append(float(dt))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def rows(self):
        return zip(*(getattr(self, c) for c in TRACE_COLUMNS))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.rows():
            w.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        tr = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header {reader.fieldnames}")
            for row in reader:
                for c in TRACE_COLUMNS:
                    getattr(tr, c).append(float(row[c]))
        return tr


__all__ = [
    "Energy",
    "EnergyTrace",
    "MonotonicityReport",
    "TRACE_COLUMNS",
    "discrete_energy",
    "hausdorff",
    "monotonicity_report",
    "shape_distance",
    "turning_number",
]
