import math

import numpy as np
import pytest

from elasticflow import curves, diagnostics, fem, variational
from elasticflow.curves import DiscreteCurve
from elasticflow.diagnostics import EnergyTrace


def test_energy_of_exact_elastica_converges_to_2pi():
    d = [diagnostics.discrete_energy(curves.gen_rect_elastica(1, J)).Ehat - 2 * math.pi for J in (256, 512, 1024)]
    assert abs(d[0]) < 1e-3
    # second order in h
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.02)
    assert d[1] / d[2] == pytest.approx(4.0, rel=0.02)


def test_energy_is_scale_invariant_in_Ehat():
    c = curves.gen_critical(1.43, 0.71, 128)
    e1 = diagnostics.discrete_energy(c)
    e2 = diagnostics.discrete_energy(c.scaled(3.0, (1.0, 2.0)))
    assert e2.Ehat == pytest.approx(e1.Ehat, rel=1e-14)
    assert e2.E == pytest.approx(e1.E / 3.0, rel=1e-14)
    assert e2.length == pytest.approx(3.0 * e1.length, rel=1e-14)


def test_energy_quadrature_is_exact_for_linear_normal_component():
    # two nodes, y . n = 1 and 3 on one unit element: 1/2 int_0^1 (1 + 2t)^2 dt = 13/6
    x = np.array([[0.0, 0.0], [1.0, 0.0]])
    y = np.array([[0.0, 1.0], [0.0, 3.0]])
    e = diagnostics.discrete_energy(DiscreteCurve(x, y))
    assert e.E == pytest.approx(13.0 / 6.0, rel=1e-15)


def test_energy_requires_y():
    with pytest.raises(ValueError):
        diagnostics.discrete_energy(curves.gen_lemniscate(16))


def test_monotonicity_report_on_elastica():
    # for kappa = sqrt2 cn(s): int kappa^4 = 2 int kappa_s^2 exactly (stationary length)
    c = curves.gen_rect_elastica(1, 2048, b=1.0)
    rep = diagnostics.monotonicity_report(c)
    assert rep.int_k4 == pytest.approx(2 * rep.int_ks2, rel=1e-5)
    assert abs(rep.length_rate) < 1e-5 * rep.int_k4


def test_monotonicity_report_on_critical_curve():
    c = curves.gen_critical(variational.critical_amplitude(), 0.71, 2048)
    rep = diagnostics.monotonicity_report(c)
    r4 = variational.remark4_report()
    assert rep.int_k4 == pytest.approx(r4.int_u4, rel=1e-5)
    assert rep.int_ks2 == pytest.approx(r4.int_du2, rel=1e-5)


def test_turning_number():
    assert diagnostics.turning_number(curves.gen_line(8)) == 0.0
    assert diagnostics.turning_number(curves.gen_rect_elastica(1, 256)) == pytest.approx(0.0, abs=1e-12)
    # the two quarter loops of the half lemniscate turn in opposite senses
    assert diagnostics.turning_number(curves.gen_lemniscate(256)) == pytest.approx(0.0, abs=1e-12)
    # inscribed upper semicircle traversed clockwise: 99 vertices each turn by -pi/100
    t = np.linspace(math.pi, 0.0, 101)
    semi = DiscreteCurve(np.stack([np.cos(t), np.sin(t)], -1))
    assert diagnostics.turning_number(semi) == pytest.approx(-0.5 * 99 / 100, abs=1e-12)


def test_hausdorff_basic():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.5], [1.0, 0.5]])
    assert diagnostics.hausdorff(a, b) == pytest.approx(0.5)
    c = np.array([[0.0, 0.0], [2.0, 0.0]])
    assert diagnostics.hausdorff(a, c) == pytest.approx(1.0)
    assert diagnostics.hausdorff(a, a) == 0.0


def test_shape_distance_invariances():
    lem = curves.gen_lemniscate(256)
    moved = lem.scaled(2.5, (4.0, -1.0))
    assert diagnostics.shape_distance(lem, moved) < 1e-12
    flipped = DiscreteCurve(lem.x * [-1.0, 1.0])
    assert diagnostics.shape_distance(lem, flipped) < 1e-12
    assert diagnostics.shape_distance(lem, flipped, reflect=False) > 0.1
    # the half lemniscate is symmetric under the half turn
    assert diagnostics.shape_distance(lem, DiscreteCurve(-lem.x), reflect=False) < 1e-12
    assert diagnostics.shape_distance(lem, curves.gen_rect_elastica(1, 256)) > 0.05


def test_shape_distance_resolution_independent():
    assert diagnostics.shape_distance(curves.gen_lemniscate(256), curves.gen_lemniscate(1024)) < 1e-3


def test_trace_records_and_round_trips(tmp_path):
    c = curves.gen_rect_elastica(1, 64, b=1.0)
    tr = EnergyTrace()
    tr.record(0.0, c)
    tr.record(0.1, fem.step(fem.FlowState(0.0, 0, c), 0.1 / 8).curve, 0.1 / 8)
    with pytest.raises(ValueError):
        tr.record(0.1, c)
    text = tr.to_csv(tmp_path / "tr.csv")
    assert text.splitlines()[0] == ",".join(diagnostics.TRACE_COLUMNS)
    back = EnergyTrace.from_csv(tmp_path / "tr.csv")
    for col in diagnostics.TRACE_COLUMNS:
        np.testing.assert_array_equal(back.array(col), tr.array(col))
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        EnergyTrace.from_csv(tmp_path / "bad.csv")


def test_line_energy_is_zero():
    e = diagnostics.discrete_energy(curves.gen_line(16, 2.0))
    assert e == (0.0, 0.0, pytest.approx(4.0))
    rep = diagnostics.monotonicity_report(curves.gen_line(16))
    assert rep.int_ks2 == 0.0 and rep.int_k4 == 0.0 and rep.lhs_ok


def test_table_errors_shrink_sixteenfold_per_quadrupling():
    a = variational.critical_amplitude()
    for gen in (lambda J: curves.gen_critical(a, 0.71, J), lambda J: curves.gen_rect_elastica(1, J)):
        d = [diagnostics.discrete_energy(gen(J)).Ehat - 2 * math.pi for J in (1024, 4096, 16384)]
        assert d[0] / d[1] == pytest.approx(16.0, rel=0.01)
        assert d[1] / d[2] == pytest.approx(16.0, rel=0.01)


def test_critical_curve_violates_sufficient_condition():
    c = curves.gen_critical(variational.critical_amplitude(), 0.71, 4096)
    assert not diagnostics.monotonicity_report(c).lhs_ok


def test_turning_number_of_test_curves():
    assert diagnostics.turning_number(curves.gen_rect_elastica(1, 1024)) == pytest.approx(0.0, abs=1e-10)
    assert diagnostics.turning_number(curves.gen_figure_eight(256)) == pytest.approx(0.0, abs=1e-12)


def test_energy_nonincreasing_below_threshold():
    J = 128
    rho = np.linspace(-1, 1, J + 1)
    x = np.stack([rho, 0.1 * np.cos(np.pi * rho) + 0.02 * np.cos(3 * np.pi * rho)], -1)
    c = fem.solve_y0(DiscreteCurve(x))
    e0 = diagnostics.discrete_energy(c).Ehat
    assert e0 <= 1.9615 * math.pi
    res = fem.run_flow(fem.FlowConfig(J=J, dt0=1e-3, t_end=2.0), c)
    e = res.trace.array("Ehat")
    assert np.all(np.diff(e) <= 1e-10 * e[:-1])
    assert e[-1] < 0.5 * e0


def test_trace_columns_consistent():
    c = curves.gen_critical(1.43, 0.71, 64)
    res = fem.run_flow(fem.FlowConfig(J=64, dt0=1e-3, t_end=0.01), c)
    tr = res.trace
    np.testing.assert_allclose(tr.array("Ehat"), tr.array("E") * tr.array("length"), rtol=1e-13)
    assert np.all(tr.array("length") > 0)
