import math

import numpy as np
import pytest
import scipy.integrate

from elasticflow import stability
from elasticflow.elliptic import complete_K, jacobi

K = complete_K(1 / math.sqrt(2))


def test_coefficients_at_special_points():
    assert stability.linearized_coefficients(0.0) == pytest.approx((5.0, -2.0), abs=1e-15)
    assert stability.linearized_coefficients(K) == pytest.approx((0.0, 3.0), abs=1e-13)
    cn = jacobi(K / 2, 1 / math.sqrt(2)).cn
    c2, c0 = stability.linearized_coefficients(K / 2)
    assert c2 == pytest.approx(5 * cn**2, abs=1e-12)
    assert c0 == pytest.approx(3 - 5 * cn**4, abs=1e-12)


def test_zero_mode():
    zero = stability.TestMode.from_functions("zero", np.zeros_like, np.zeros_like, np.zeros_like)
    assert stability.quad_form_B(zero) == 0.0


def test_first_cosine_mode():
    assert stability.quad_form_B(stability.cosine_mode(1)) == pytest.approx(-0.1646, abs=1e-3)


def test_constant_mode_closed_form():
    assert stability.quad_form_B(stability.cosine_mode(0)) == pytest.approx(stability.constant_mode_value(), abs=1e-10)


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_simpson_against_adaptive_quadrature(j):
    w = j * math.pi / (2 * K)

    def f(s):
        c2, c0 = stability.linearized_coefficients(s)
        return (w**2 * math.cos(w * s)) ** 2 - c2 * (w * math.sin(w * s)) ** 2 + c0 * math.cos(w * s) ** 2

    want = scipy.integrate.quad(f, 0.0, 2 * K, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert stability.quad_form_B(stability.cosine_mode(j)) == pytest.approx(want, abs=1e-8)


def test_form_agrees_with_operator():
    for j in (0, 1, 2):
        m = stability.cosine_mode(j)
        B = stability.quad_form_B(m)
        assert stability.operator_form(m) == pytest.approx(B, rel=1e-4)


def test_sampled_mode_matches_analytic_mode():
    a = stability.cosine_mode(1)
    b = stability.TestMode.from_samples("cos1", np.cos(math.pi * a.s / (2 * K)))
    assert stability.quad_form_B(b) == pytest.approx(stability.quad_form_B(a), abs=1e-9)


def test_inadmissible_mode_rejected():
    s = np.linspace(0, 2 * K, 2**10 + 1)
    w = math.pi / (4 * K)
    m = stability.TestMode("sin", s, np.sin(w * s), w * np.cos(w * s), -w * w * np.sin(w * s))
    with pytest.raises(stability.InadmissibleModeError):
        stability.quad_form_B(m)
    with pytest.raises(ValueError):
        stability.TestMode.from_samples("short", np.ones(5))


def test_rayleigh_minimum_negative():
    res = stability.rayleigh_minimum([stability.cosine_mode(j) for j in range(3)])
    assert res.min_eigenvalue < 0.0
    # the minimiser beats each single mode quotient
    single = stability.quad_form_B(stability.cosine_mode(1)) / K
    assert res.min_eigenvalue <= single + 1e-12


def test_simpson_needs_even_panels():
    with pytest.raises(ValueError):
        stability._simpson(np.ones(4), 0.1)
