import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticepdo.classes import ball_points, check_ellipticity, estimate_seminorm
from latticepdo.fourier import TorusGrid
from latticepdo.lattice import LatticeBox
from latticepdo.symbols import (DimensionMismatch, ExpressionSymbol, axis_shift, builtin, constant,
                                discrete_laplacian, elliptic_demo, japanese_bracket, perturbed, smooth_cutoff,
                                tabulate, trig_poly)

GRID = TorusGrid(1, 32)


def test_builtin_values():
    assert np.allclose(japanese_bracket(0)([[3]], [[0.2]]), 1.0)
    assert japanese_bracket(2)([[1]], [[0.0]])[0, 0] == pytest.approx(2.0)
    assert japanese_bracket(-2, dim=2)([[1, 1]], [[0.1, 0.4]])[0, 0] == pytest.approx(1 / 3)
    x = np.array([[0.25]])
    assert axis_shift()([[5]], x)[0, 0] == pytest.approx(1j)
    assert axis_shift(sign=-1)([[5]], x)[0, 0] == pytest.approx(-1j)
    assert elliptic_demo(1)([[0]], [[0.5]])[0, 0] == pytest.approx(1.0)
    assert discrete_laplacian()([[0]], [[0.5]])[0, 0] == pytest.approx(-4.0)
    assert trig_poly({1: 0.5, -1: 0.5})([[0]], [[0.0]])[0, 0] == pytest.approx(1.0)


def test_builtin_lookup_and_errors():
    assert builtin("japanese_bracket", {"s": 1.5}).order == 1.5
    with pytest.raises(ValueError):
        builtin("no_such_symbol")
    with pytest.raises(ValueError):
        builtin("japanese_bracket", {"t": 1})
    with pytest.raises(ValueError):
        axis_shift(axis=2, dim=1)
    with pytest.raises(ValueError):
        perturbed(1, {1: 0.1}, drop=0)


def test_expression_symbol_matches_builtin():
    e = ExpressionSymbol("L(1) * (2 + cos(2*pi*x1))", 1, 1)
    k = np.arange(-5, 6)[:, None]
    assert np.allclose(e.sample(k, GRID), elliptic_demo(1).sample(k, GRID))
    with pytest.raises(ValueError):
        ExpressionSymbol("__import__('os')", 1, 0)


def test_order_bookkeeping():
    a, b = japanese_bracket(1), japanese_bracket(-0.5)
    assert (a + b).order == 1.0
    assert (a * b).order == 0.5
    assert (3 * a).order == 1.0
    assert a.with_order(2).order == 2.0 and a.order == 1.0
    with pytest.raises(DimensionMismatch):
        a + japanese_bracket(1, dim=2)


def test_smooth_cutoff_shape():
    t = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
    assert np.allclose(smooth_cutoff(t), [0, 0, 0.5, 1, 1])


def test_tabulated_symbol_reproduces_samples():
    box = LatticeBox(1, 6, 2)
    a = elliptic_demo(0.5)
    tab = tabulate(a, box, GRID)
    k = box.points()
    assert np.allclose(tab.sample(k, GRID), a.sample(k, GRID))


def test_ball_points_count():
    assert len(ball_points(1, 4)) == 9
    assert len(ball_points(2, 1)) == 5
    assert len(ball_points(2, 2, inner=1)) == 13 - 5


def test_seminorm_of_bracket_matches_enumeration():
    k = np.arange(-32, 33)
    for s in (-1.0, 0.5, 2.0):
        oracle = np.max((1 + k ** 2) ** (s / 2) / (1 + np.abs(k)) ** s)
        rep = estimate_seminorm(japanese_bracket(s), (0,), (0,), 32, GRID)
        assert rep.constant == pytest.approx(oracle, rel=1e-12)
        assert rep.constant <= 2.0 ** (abs(s) / 2) + 1e-12
        assert rep.accepted


def test_x_independent_symbol_has_no_x_derivative():
    rep = estimate_seminorm(japanese_bracket(1), (0,), (1,), 32, GRID)
    assert rep.constant == 0.0


def test_plane_wave_first_derivative():
    rep = estimate_seminorm(axis_shift(), (0,), (1,), 16, GRID)
    assert rep.constant == pytest.approx(1.0)


def test_wrong_order_is_rejected():
    rep = estimate_seminorm(japanese_bracket(2), (0,), (0,), 32, GRID, order=1.0)
    assert not rep.accepted
    assert rep.growth == pytest.approx(1.0, abs=0.15)


def test_difference_lowers_the_order():
    rep = estimate_seminorm(elliptic_demo(1), (2,), (0,), 32, GRID)
    assert rep.accepted and rep.constant > 0


def test_ellipticity_examples():
    for m in (-1.0, 1.0, 2.0):
        cert = check_ellipticity(japanese_bracket(m), 0, 32, GRID)
        assert cert.passed
        assert cert.constant >= 2.0 ** (-abs(m) / 2) - 1e-12
    assert check_ellipticity(elliptic_demo(1), 0, 32, GRID).passed
    assert not check_ellipticity(discrete_laplacian(), 0, 32, GRID).passed
    with pytest.raises(ValueError):
        check_ellipticity(japanese_bracket(1), 8, 4, GRID)


orders = st.floats(-2, 2).map(lambda v: round(v, 2))


@given(orders, st.floats(0.05, 1.0))
def test_inclusion_into_larger_order(m, gap):
    a = elliptic_demo(m)
    rep = estimate_seminorm(a, (1,), (0,), 24, GRID, order=m + gap)
    assert rep.accepted


@given(orders, orders)
def test_products_stay_in_the_class(m1, m2):
    prod = elliptic_demo(m1) * japanese_bracket(m2)
    for alpha in (0, 1):
        assert estimate_seminorm(prod, (alpha,), (0,), 24, GRID).accepted


@given(orders, st.floats(0.0, 0.5))
def test_ellipticity_survives_small_lower_order_perturbation(m, size):
    a = perturbed(m, {1: size / 2, -1: size / 2}, drop=1.0)
    assert check_ellipticity(a, 0, 24, GRID).constant >= 0.5 * 2.0 ** (-abs(m) / 2) * 0.5


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_constants_and_brackets_are_x_independent(c, s):
    a = constant(c) * japanese_bracket(s)
    vals = a.sample(np.arange(-4, 5)[:, None], GRID)
    assert np.allclose(vals, vals[:, :1])
