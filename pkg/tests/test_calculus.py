import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticepdo.calculus import adjoint_symbol, asymptotic_sum, compose_symbols, remainder_order_probe
from latticepdo.classes import check_ellipticity
from latticepdo.corpus import adjoint_residuals, compose_residuals, monotone_within
from latticepdo.fourier import TorusGrid
from latticepdo.lattice import LatticeBox, margin_mask
from latticepdo.quantization import finite_section
from latticepdo.symbols import axis_shift, elliptic_demo, japanese_bracket, trig_poly

BOX, GRID = LatticeBox(1, 16), TorusGrid(1, 64)


def interior_gap(A, B, margin):
    sel = margin_mask(BOX, margin)
    return float(np.max(np.abs((A - B)[np.ix_(sel, sel)])))


def test_x_independent_composition_is_exact():
    a, b = japanese_bracket(1.5), japanese_bracket(-0.5)
    c = compose_symbols(a, b, 1, GRID).symbol
    k = np.arange(-10, 11)[:, None]
    assert np.allclose(c.sample(k, GRID), japanese_bracket(1).sample(k, GRID))


def test_plane_wave_times_bracket_terminates():
    a, b = axis_shift(), japanese_bracket(1)
    exact = (finite_section(a, BOX, GRID) @ finite_section(b, BOX, GRID)).matrix
    two = finite_section(compose_symbols(a, b, 2, GRID).symbol, BOX, GRID).matrix
    assert interior_gap(two, exact, 3) < 1e-12
    one = finite_section(compose_symbols(a, b, 1, GRID).symbol, BOX, GRID).matrix
    assert interior_gap(one, exact, 3) > 1e-3


def test_composition_residual_is_monotone():
    res = compose_residuals(elliptic_demo(1), japanese_bracket(0.5), LatticeBox(1, 32), TorusGrid(1, 128), [1, 2, 3, 4])
    assert monotone_within(res)
    assert res[-1] < res[0]


def test_exact_adjoints():
    for a in (japanese_bracket(1.5), axis_shift(), axis_shift(sign=-1), 2.0 * japanese_bracket(-1)):
        H = finite_section(a, BOX, GRID).matrix.conj().T
        Q = finite_section(adjoint_symbol(a, 3, GRID).symbol, BOX, GRID).matrix
        assert interior_gap(Q, H, 5) < 1e-12


def test_adjoint_of_bracket_shift_converges():
    res = adjoint_residuals(japanese_bracket(1) * axis_shift(), LatticeBox(1, 32), TorusGrid(1, 128), [1, 2, 3, 4, 5])
    assert monotone_within(res)
    assert res[-1] < 1e-2 * res[0]


def test_adjoint_preserves_ellipticity():
    q = adjoint_symbol(elliptic_demo(1), 4, GRID).symbol
    assert check_ellipticity(q, 4, 32, GRID).passed


def test_term_bookkeeping():
    res = compose_symbols(elliptic_demo(1), japanese_bracket(0.5), 3, GRID)
    assert res.remainder_order == pytest.approx(-1.5)
    assert [t.order for t in res.terms] == [1.5, 0.5, -0.5]
    with pytest.raises(ValueError):
        adjoint_symbol(elliptic_demo(1), 0, GRID)


def test_remainder_exponent_drops_by_one_per_term():
    box, grid = LatticeBox(1, 32), TorusGrid(1, 128)
    a, b = trig_poly({1: 0.5, -1: 0.5}), japanese_bracket(1.5)
    exact = finite_section(a, box, grid) @ finite_section(b, box, grid)
    exps = [remainder_order_probe(exact, compose_symbols(a, b, n, grid), grid, margin=2).fitted_exponent
            for n in (1, 2, 3)]
    steps = np.diff(exps)
    assert np.all(np.abs(steps + 1) <= 0.3)


def test_asymptotic_sum_single_symbol():
    a = elliptic_demo(1)
    total = asymptotic_sum([a], grid=TorusGrid(1, 32))
    k = np.arange(2, 20)[:, None]
    assert np.allclose(total.sample(k, GRID), a.sample(k, GRID))


def test_asymptotic_sum_far_from_the_origin():
    syms = [japanese_bracket(-1), japanese_bracket(-2), japanese_bracket(-3)]
    total = asymptotic_sum(syms, radii=[1, 2, 4], grid=TorusGrid(1, 32))
    k = np.arange(16, 40)[:, None]
    plain = sum(s.sample(k, GRID) for s in syms)
    assert np.allclose(total.sample(k, GRID), plain)
    assert all(c["ok"] for c in total.meta["radius_checks"])


def test_asymptotic_sum_rejects_bad_orders():
    with pytest.raises(ValueError):
        asymptotic_sum([japanese_bracket(-1), japanese_bracket(-1)])
    with pytest.raises(ValueError):
        asymptotic_sum([japanese_bracket(-1), japanese_bracket(-2)], radii=[4, 2])


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_x_independent_composition_property(m1, m2):
    c = compose_symbols(japanese_bracket(m1), japanese_bracket(m2), 2, GRID).symbol
    k = np.arange(-8, 9)[:, None]
    assert np.allclose(c.sample(k, GRID), japanese_bracket(m1 + m2).sample(k, GRID), rtol=1e-12)


@given(st.floats(-0.4, 0.4), st.floats(-1, 1))
def test_adjoint_twice_is_close_to_identity(c, m):
    a = japanese_bracket(m) * trig_poly({0: 1.0, 1: c})
    qq = adjoint_symbol(adjoint_symbol(a, 4, GRID).symbol, 4, GRID).symbol
    k = np.arange(10, 14)[:, None]
    diff = np.abs(qq.sample(k, GRID) - a.sample(k, GRID)).max()
    assert diff <= 1e-2 * (1 + np.abs(a.sample(k, GRID)).max())
