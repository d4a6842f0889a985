"""Hot loops for the semi-implicit step: assembly and banded LU.

Each kernel exists twice.  The ``*_loop`` functions are explicit loops
written for numba (they also run, slowly, as plain Python).  The ``*_numpy``
functions are vectorised equivalents used when numba is unavailable or
disabled.

Band storage is row compact: ``band[i, HB + j - i] = A[i, j]`` with
half-bandwidth ``HB = 7`` for the nodewise ordering ``(X1, X2, Y1, Y2)``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from ._accel import HAVE_NUMBA, njit

HB = 7
WIDTH = 2 * HB + 1

# 3-point Gauss-Legendre on [0, 1]; weights sum to one
_G = math.sqrt(0.6)
GAUSS_X = np.array([0.5 * (1.0 - _G), 0.5, 0.5 * (1.0 + _G)])
GAUSS_W = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


def assemble_loop(x, y, dt, gx, gw, band, rhs):
    """Accumulate the element contributions of one step into ``band`` and ``rhs``.

    ``band`` and ``rhs`` must be zeroed by the caller.  Boundary constraints
    are not applied here.
    """
    J = x.shape[0] - 1
    h = 2.0 / J
    inv_h = 1.0 / h
    N = np.empty(2)
    dN = np.empty(2)
    dN[0] = -inv_h
    dN[1] = inv_h
    a = np.empty(2)
    c = np.empty(2)
    b = np.empty(2)
    xm = np.empty(2)
    F2 = np.empty((2, 2))
    for e in range(J):
        for al in range(2):
            a[al] = (x[e + 1, al] - x[e, al]) * inv_h
            c[al] = (y[e + 1, al] - y[e, al]) * inv_h
        q = a[0] * a[0] + a[1] * a[1]
        for g in range(gx.shape[0]):
            xi = gx[g]
            wh = gw[g] * h
            N[0] = 1.0 - xi
            N[1] = xi
            for al in range(2):
                b[al] = y[e, al] * N[0] + y[e + 1, al] * N[1]
                xm[al] = x[e, al] * N[0] + x[e + 1, al] * N[1]
            ab = a[0] * b[0] + a[1] * b[1]
            bb = b[0] * b[0] + b[1] * b[1]
            f3 = -0.5 * (q * bb - ab * ab)
            for al in range(2):
                for be in range(2):
                    F2[al, be] = 2.0 * (c[al] * a[be] - a[al] * c[be]) + 2.0 * ab * (
                        a[al] * b[be] - b[al] * a[be]
                    )
            for il in range(2):
                node_i = e + il
                for al in range(2):
                    ra = 4 * node_i + al
                    rb = ra + 2
                    rhs[ra] += wh * N[il] * (f3 * b[al] + q / dt * xm[al])
                    for kl in range(2):
                        node_k = e + kl
                        NN = N[il] * N[kl]
                        dd = dN[il] * dN[kl]
                        cx = 4 * node_k + al
                        cy = cx + 2
                        # diagonal-in-component terms
                        band[ra, HB + cx - ra] += wh * q / dt * NN
                        band[ra, HB + cy - ra] -= wh * dd
                        band[rb, HB + cy - rb] += wh * q * NN
                        band[rb, HB + cx - rb] += wh * dd
                        for be in range(2):
                            cyb = 4 * node_k + 2 + be
                            v = (
                                2.0 * a[be] * dN[kl] * b[al] * N[il]
                                + q * b[al] * b[be] * NN
                                + F2[al, be] * NN
                            )
                            band[ra, HB + cyb - ra] -= wh * v


def assemble_numpy(x, y, dt, gx=GAUSS_X, gw=GAUSS_W):
    """Vectorised assembly; returns fresh ``(band, rhs)``."""
    J = x.shape[0] - 1
    h = 2.0 / J
    n = 4 * (J + 1)
    a = np.diff(x, axis=0) / h  # (J, 2)
    c = np.diff(y, axis=0) / h
    q = np.einsum("ei,ei->e", a, a)
    Nq = np.stack([1.0 - gx, gx], axis=-1)  # (G, 2)
    dN = np.array([-1.0, 1.0]) / h
    b = np.einsum("gl,ela->ega", Nq, np.stack([y[:-1], y[1:]], axis=1))
    xm = np.einsum("gl,ela->ega", Nq, np.stack([x[:-1], x[1:]], axis=1))
    ab = np.einsum("ea,ega->eg", a, b)
    bb = np.einsum("ega,ega->eg", b, b)
    f3 = -0.5 * (q[:, None] * bb - ab**2)
    F2 = 2.0 * (c[:, None, :, None] * a[:, None, None, :] - a[:, None, :, None] * c[:, None, None, :])
    F2 = F2 + 2.0 * ab[:, :, None, None] * (
        a[:, None, :, None] * b[:, :, None, :] - b[:, :, :, None] * a[:, None, None, :]
    )
    wh = gw * h
    M = np.einsum("g,gi,gk->ik", wh, Nq, Nq)  # (2, 2)
    S = np.outer(dN, dN) * h
    eye = np.eye(2)

    K = np.zeros((J, 2, 4, 2, 4))  # (e, il, row comp, kl, col comp)
    mass_x = (q / dt)[:, None, None] * M
    K[:, :, 0:2, :, 0:2] += np.einsum("eik,ab->eiakb", mass_x, eye)
    K[:, :, 0:2, :, 2:4] -= np.einsum("ik,ab->iakb", S, eye)[None]
    K[:, :, 2:4, :, 2:4] += np.einsum("eik,ab->eiakb", q[:, None, None] * M, eye)
    K[:, :, 2:4, :, 0:2] += np.einsum("ik,ab->iakb", S, eye)[None]
    Bn = np.einsum("g,ega,gi->eia", wh, b, Nq)
    K[:, :, 0:2, :, 2:4] -= 2.0 * np.einsum("eia,eb,k->eiakb", Bn, a, dN)
    K[:, :, 0:2, :, 2:4] -= np.einsum("g,e,ega,egb,gi,gk->eiakb", wh, q, b, b, Nq, Nq)
    K[:, :, 0:2, :, 2:4] -= np.einsum("g,egab,gi,gk->eiakb", wh, F2, Nq, Nq)
    Kloc = K.reshape(J, 8, 8)

    loc = np.arange(8)
    rows = 4 * np.arange(J)[:, None, None] + loc[None, :, None]
    offs = HB + loc[None, None, :] - loc[None, :, None]
    band = np.zeros((n, WIDTH))
    np.add.at(band, (np.broadcast_to(rows, Kloc.shape), np.broadcast_to(offs, Kloc.shape)), Kloc)

    load = np.einsum("g,gi,ega->eia", wh, Nq, f3[:, :, None] * b + (q / dt)[:, None, None] * xm)
    rhs = np.zeros(n)
    idx = 4 * np.arange(J)[:, None, None] + 4 * np.arange(2)[None, :, None] + np.arange(2)[None, None, :]
    np.add.at(rhs, idx, load)
    return band, rhs


def apply_constraints_loop(band, rhs, rows, values):
    """Replace ``rows`` by identity equations and eliminate their columns."""
    n = band.shape[0]
    for t in range(rows.shape[0]):
        r = rows[t]
        v = values[t]
        lo = max(0, r - HB)
        hi = min(n - 1, r + HB)
        for i in range(lo, hi + 1):
            if i != r:
                rhs[i] -= band[i, HB + r - i] * v
                band[i, HB + r - i] = 0.0
        for d in range(WIDTH):
            band[r, d] = 0.0
        band[r, HB] = 1.0
        rhs[r] = v


def banded_lu_solve_loop(band, rhs):
    """Gaussian elimination with partial pivoting on compact band storage.

    Works on copies and returns the solution.  After elimination row ``i``
    of the work array holds ``U[i, i:i + 2 HB + 1]``: row interchanges widen
    the upper band to ``2 HB``.
    """
    n = band.shape[0]
    m1 = HB
    mm = 2 * HB + 1
    a = np.zeros((n, mm))
    for i in range(n):
        for d in range(mm):
            a[i, d] = band[i, d]
    b = rhs.copy()
    al = np.zeros((n, m1))
    indx = np.zeros(n, dtype=np.int64)
    # shift the first m1 rows left so a[i, 0] holds the leftmost stored entry
    ll = m1
    for i in range(m1):
        shift = ll
        for j in range(shift, mm):
            a[i, j - shift] = a[i, j]
        for j in range(mm - shift, mm):
            a[i, j] = 0.0
        ll -= 1
    ll = m1
    for k in range(n):
        dum = a[k, 0]
        piv = k
        if ll < n:
            ll += 1
        for j in range(k + 1, ll):
            if abs(a[j, 0]) > abs(dum):
                dum = a[j, 0]
                piv = j
        indx[k] = piv
        if dum == 0.0:
            raise ZeroDivisionError("singular banded matrix")
        if piv != k:
            for j in range(mm):
                tmp = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = tmp
        for i in range(k + 1, ll):
            f = a[i, 0] / a[k, 0]
            al[k, i - k - 1] = f
            for j in range(1, mm):
                a[i, j - 1] = a[i, j] - f * a[k, j]
            a[i, mm - 1] = 0.0
    ll = m1
    for k in range(n):
        p = indx[k]
        if p != k:
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        if ll < n:
            ll += 1
        for i in range(k + 1, ll):
            b[i] -= al[k, i - k - 1] * b[k]
    ll = 1
    for i in range(n - 1, -1, -1):
        s = b[i]
        for k in range(1, ll):
            s -= a[i, k] * b[k + i]
        b[i] = s / a[i, 0]
        if ll < mm:
            ll += 1
    return b


def banded_matvec_loop(band, v):
    n = band.shape[0]
    out = np.zeros(n)
    for i in range(n):
        s = 0.0
        for d in range(WIDTH):
            j = i + d - HB
            if 0 <= j < n:
                s += band[i, d] * v[j]
        out[i] = s
    return out


def relative_residual_loop(band, sol, rhs):
    """``||A sol - rhs||_inf / (||A||_inf ||sol||_inf + ||rhs||_inf)`` in one pass."""
    n = band.shape[0]
    rmax = 0.0
    amax = 0.0
    smax = 0.0
    bmax = 0.0
    for i in range(n):
        s = -rhs[i]
        rowsum = 0.0
        for d in range(WIDTH):
            j = i + d - HB
            if 0 <= j < n:
                s += band[i, d] * sol[j]
                rowsum += abs(band[i, d])
        rmax = max(rmax, abs(s))
        amax = max(amax, rowsum)
        smax = max(smax, abs(sol[i]))
        bmax = max(bmax, abs(rhs[i]))
    scale = amax * smax + bmax
    if scale == 0.0:
        return 0.0
    return rmax / scale


def band_to_lapack(band):
    """Convert row-compact storage to the ``(l + u + 1, n)`` layout of LAPACK ``gbsv``."""
    n = band.shape[0]
    ab = np.zeros((WIDTH, n))
    for d in range(-HB, HB + 1):
        # A[i, i + d] lives in ab[HB - d, i + d]
        if d >= 0:
            ab[HB - d, d:] = band[: n - d, HB + d]
        else:
            ab[HB - d, : n + d] = band[-d:, HB + d]
    return ab


def banded_solve_numpy(band, rhs):
    return scipy.linalg.solve_banded((HB, HB), band_to_lapack(band), rhs)


def banded_matvec_numpy(band, v):
    n = band.shape[0]
    out = np.zeros(n)
    for d in range(-HB, HB + 1):
        if d >= 0:
            out[: n - d] += band[: n - d, HB + d] * v[d:]
        else:
            out[-d:] += band[-d:, HB + d] * v[: n + d]
    return out


if HAVE_NUMBA:
    assemble_numba = njit(assemble_loop)
    apply_constraints_numba = njit(apply_constraints_loop)
    banded_lu_solve_numba = njit(banded_lu_solve_loop)
    banded_matvec_numba = njit(banded_matvec_loop)
    relative_residual_numba = njit(relative_residual_loop)
else:  # pragma: no cover
    assemble_numba = apply_constraints_numba = None
    banded_lu_solve_numba = banded_matvec_numba = relative_residual_numba = None
