import math

import numpy as np
import pytest
import scipy.integrate

from elasticflow import curves, fem, variational
from elasticflow.curves import DegenerateCurveError, DiscreteCurve
from elasticflow.elliptic import complete_KE, jacobi

ROT_PI = np.array([[-1.0, 0.0], [0.0, -1.0]])


def test_discrete_curve_shapes():
    with pytest.raises(ValueError):
        DiscreteCurve(np.zeros((5, 3)))
    with pytest.raises(ValueError):
        DiscreteCurve(np.zeros((5, 2)), np.zeros((4, 2)))
    c = curves.gen_line(8)
    assert c.J == 8 and c.h == 0.25
    np.testing.assert_allclose(c.nodes, np.linspace(-1, 1, 9))
    assert c.length == pytest.approx(2.0)


def test_check_rejects_degenerate_and_bad_y():
    x = np.zeros((5, 2))
    x[:, 0] = [0, 1, 1, 2, 3]
    with pytest.raises(DegenerateCurveError):
        DiscreteCurve(x).check()
    c = curves.gen_line(8)
    c.y[0, 0] = 1.0
    with pytest.raises(ValueError):
        c.check()


def test_scaled_and_copy():
    c = curves.gen_rect_elastica(1, 64, b=1.0)
    d = c.scaled(2.0, (0.0, 3.0))
    np.testing.assert_allclose(d.x, 2 * c.x + [0, 3])
    np.testing.assert_allclose(d.y, c.y / 2)
    e = c.copy()
    e.x[0, 0] = 99.0
    assert c.x[0, 0] != 99.0


@pytest.mark.parametrize("J", [64, 512])
def test_critical_curve_is_arclength_with_exact_curvature(J):
    a, k = 1.43, 0.71
    c = curves.gen_critical(a, k, J)
    L = curves.critical_length(k)
    s = np.linspace(0, L, J + 1)
    # positions against an independent quadrature of the tangent angle
    theta = lambda t: (a / k) * math.atan(k * jacobi(t, k).sn / jacobi(t, k).dn)
    for j in (J // 4, J // 2, 3 * J // 4, J):
        px = scipy.integrate.quad(lambda t: math.cos(theta(t)), 0, s[j], epsabs=1e-14, limit=200)[0]
        py = scipy.integrate.quad(lambda t: math.sin(theta(t)), 0, s[j], epsabs=1e-14, limit=200)[0]
        np.testing.assert_allclose(c.x[j], [px, py], atol=1e-12)
    np.testing.assert_allclose(np.hypot(*c.y.T), np.abs(a * jacobi(s, k).cn), atol=1e-14)
    assert c.y[0, 0] == 0.0 and c.y[-1, 0] == 0.0


def test_critical_curve_point_symmetry():
    c = curves.gen_critical(1.41, 0.71, 256)
    mid = c.x[128]
    np.testing.assert_allclose(c.x[::-1] - mid, (c.x - mid) @ ROT_PI.T, atol=1e-13)


def test_critical_curve_meets_support_lines_perpendicularly():
    c = curves.gen_critical(variational.critical_amplitude(), 0.71, 1024)
    # theta(0) = 0 and theta(2K) = 0: horizontal end tangents
    d0, d1 = c.x[1] - c.x[0], c.x[-1] - c.x[-2]
    assert abs(d0[1] / d0[0]) < 1e-2 and abs(d1[1] / d1[0]) < 1e-2


def test_critical_rejects_bad_input():
    with pytest.raises(ValueError):
        curves.gen_critical(-1.0)
    with pytest.raises(ValueError):
        curves.gen_critical(1.0, J=101)


def test_elastica_centred_geometry():
    c = curves.gen_rect_elastica(1, 1024)
    K, E = complete_KE(1 / math.sqrt(2))
    assert c.x[0, 0] == pytest.approx(-1.0, abs=1e-14)
    assert c.x[-1, 0] == pytest.approx(1.0, abs=1e-13)
    assert c.length == pytest.approx(2 * K / (2 * E - K), rel=1e-6)
    assert 2 * K / (2 * E - K) == pytest.approx(4.37688, abs=1e-5)


@pytest.mark.parametrize("b", [1.0, 2.5])
def test_elastica_position_derivative_is_unit_tangent(b):
    # the closed-form positions must integrate the tangent whose angle gives kappa
    sig = np.linspace(0.0, 7.0, 15)
    g, y, kappa = curves._elastica_xy(sig, b)
    eps = 1e-6
    gp, _, _ = curves._elastica_xy(sig + eps, b)
    gm, _, _ = curves._elastica_xy(sig - eps, b)
    t = (gp - gm) / (2 * eps / b)
    np.testing.assert_allclose(np.hypot(*t.T), 1.0, atol=1e-8)
    np.testing.assert_allclose(np.hypot(*y.T), np.abs(kappa), atol=1e-13)
    np.testing.assert_allclose(kappa, curves.elastica_curvature(sig / b, b), atol=1e-14)


def test_elastica_second_half_mirrors_first():
    c = curves.gen_rect_elastica(1, 512, b=1.0)
    mid = c.x[256]
    np.testing.assert_allclose(c.x[::-1] - mid, (c.x - mid) @ ROT_PI.T, atol=1e-12)


def test_elastica_period_endpoints():
    c = curves.gen_elastica_period(256)
    assert c.x[0, 0] == 0.0 and c.x[-1, 0] == 0.0
    assert c.y[0, 0] == 0.0 and c.y[-1, 0] == 0.0
    K, _ = complete_KE(1 / math.sqrt(2))
    assert c.length == pytest.approx(4 * K, rel=1e-4)


def test_lemniscate_on_curve():
    c = curves.gen_lemniscate(256)
    r2 = (c.x**2).sum(axis=1)
    # (x^2 + y^2)^2 = y^2 - x^2 for the upright lemniscate
    np.testing.assert_allclose(r2**2, c.x[:, 1] ** 2 - c.x[:, 0] ** 2, atol=1e-14)
    np.testing.assert_allclose(c.x[[0, 128, 256]], [[0, 1], [0, 0], [0, -1]], atol=1e-15)
    with pytest.raises(ValueError):
        curves.gen_lemniscate(7)


def test_figure_eight_layout():
    c = curves.gen_figure_eight(64)
    assert c.length == pytest.approx(2 + 4 * math.pi, rel=3e-3)
    np.testing.assert_allclose(c.x[0], [0, 0])
    np.testing.assert_allclose(c.x[-1], [2, 0])
    s = np.linspace(0, 2 + 4 * math.pi, 2001)
    p = curves.figure_eight_point(s)
    steps = np.hypot(*np.diff(p, axis=0).T)
    np.testing.assert_allclose(steps, s[1] - s[0], rtol=1e-4)
    with pytest.raises(ValueError):
        curves.gen_figure_eight(30)


def test_geometry_of_circle_arc():
    t = np.linspace(0, math.pi, 201)
    x = np.stack([np.cos(t), np.sin(t)], axis=-1)[::-1]
    c = DiscreteCurve(x, -x.copy())
    g = curves.geometry(c)
    np.testing.assert_allclose(np.hypot(*g.tangents.T), 1.0)
    # clockwise traversal: the normal (-tau2, tau1) points away from the centre
    np.testing.assert_allclose(g.kappa[1:-1], -1.0, atol=1e-12)


def test_barycenter_and_normalize():
    c = curves.gen_line(16, 3.0).scaled(1.0, (0.0, 2.0))
    np.testing.assert_allclose(curves.barycenter(c), [0, 2], atol=1e-15)
    n = curves.normalize(c)
    assert n.length == pytest.approx(1.0)
    np.testing.assert_allclose(curves.barycenter(n), 0.0, atol=1e-15)


def test_snapshot_round_trip(tmp_path):
    c = curves.gen_rect_elastica(1, 32, b=1.0)
    p = curves.write_snapshot(tmp_path / "s.dat", c, t=0.5, step=12)
    d = curves.read_snapshot(p)
    np.testing.assert_array_equal(d.x, c.x)
    np.testing.assert_array_equal(d.y, c.y)
    assert d.meta["t"] == 0.5 and d.meta["step"] == 12 and d.meta["kind"] == "elastica"
    e = curves.read_snapshot(curves.write_snapshot(tmp_path / "l.dat", curves.gen_lemniscate(16)))
    assert e.y is None


def test_snapshot_rejects_ragged(tmp_path):
    p = tmp_path / "bad.dat"
    p.write_text("0 1 2\n0 1 2 3\n")
    with pytest.raises(ValueError):
        curves.read_snapshot(p)


def test_normalize_idempotent_and_invariant():
    c = curves.gen_rect_elastica(1, 1024)
    n = curves.normalize(c)
    assert n.length == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(curves.normalize(n).x, n.x, atol=1e-15)
    m = curves.normalize(c.scaled(3.0, (5.0, 7.0)))
    np.testing.assert_allclose(m.x, n.x, atol=1e-13)


def test_node_curvature_second_order():
    errs = []
    for J in (256, 512, 1024):
        c = curves.gen_rect_elastica(1, J, b=1.0)
        s = np.linspace(0.0, 2 * complete_KE(1 / math.sqrt(2))[0], J + 1)
        g = curves.geometry(DiscreteCurve(c.x, fem.solve_y0(DiscreteCurve(c.x)).y))
        errs.append(np.abs(g.kappa - curves.elastica_curvature(s))[1:-1].max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)


def test_projected_curvature_of_circle_arc():
    r = 2.5
    for J in (64, 256):
        t = np.linspace(-0.5 * math.pi, 0.5 * math.pi, J + 1)[::-1]
        x = r * np.stack([np.cos(t), np.sin(t)], -1)
        x[:, 0] -= x[0, 0]
        k = curves.geometry(fem.solve_y0(DiscreteCurve(x))).kappa
        assert np.abs(np.abs(k[J // 4 : -J // 4]) - 1 / r).max() < 20.0 / J**2
