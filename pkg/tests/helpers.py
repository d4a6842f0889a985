"""Shared constructors for the test modules."""

import numpy as np

from elasticflow import curves, fem


def perturbed_state(J, seed, amp=0.02):
    """A smooth, non-symmetric curve with projected curvature vector."""
    r = np.random.default_rng(seed)
    rho = np.linspace(-1.0, 1.0, J + 1)
    x = np.empty((J + 1, 2))
    x[:, 0] = rho
    x[:, 1] = 0.3 * np.cos(np.pi * (rho + 1) / 2)
    for j in range(1, 5):
        x[:, 1] += amp * r.normal() * np.cos(j * np.pi * (rho + 1))
        x[1:-1, 0] += amp * r.normal() * np.sin(j * np.pi * (rho[1:-1] + 1)) / j
    return fem.solve_y0(curves.DiscreteCurve(x))


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE_LINES: list = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line, flush=True)
