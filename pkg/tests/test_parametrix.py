import numpy as np
import pytest

from latticepdo.classes import estimate_seminorm
from latticepdo.fourier import TorusGrid
from latticepdo.lattice import LatticeBox, LatticeFunction
from latticepdo.parametrix import (NotEllipticError, build_parametrix, elliptic_regularity_experiment,
                                   high_frequency_rows, residual_report)
from latticepdo.symbols import constant, discrete_laplacian, elliptic_demo, japanese_bracket

BOX, GRID = LatticeBox(1, 32), TorusGrid(1, 128)


def delta0(p):
    return np.all(p == 0, axis=1).astype(float)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_multiplier_parametrix_is_exact_beyond_the_cut(m):
    res = build_parametrix(japanese_bracket(m), J=2, R=4, grid=GRID, box=BOX, t_values=(0, 1, 2))
    assert max(res.left.norms.values()) < 1e-8
    assert max(res.right.norms.values()) < 1e-8
    k = np.arange(9, 30)[:, None]
    assert np.allclose(res.q.sample(k, GRID), japanese_bracket(-m).sample(k, GRID))


def test_residual_does_not_grow_with_more_corrections():
    res = build_parametrix(elliptic_demo(1), J=3, R=4, grid=GRID, box=BOX, t_values=(0, 1))
    worst = [max(h["left"].values()) for h in res.history]
    assert len(worst) == 4
    assert all(b <= a * (1 + 1e-9) for a, b in zip(worst, worst[1:]))
    assert worst[-1] < worst[0]


def test_left_and_right_residuals_are_comparable():
    res = build_parametrix(elliptic_demo(1), J=2, R=4, grid=GRID, box=BOX, t_values=(0,))
    left, right = res.left.norms[0], res.right.norms[0]
    assert max(left, right) / min(left, right) <= 4.0


def test_parametrix_symbol_has_order_minus_m():
    res = build_parametrix(elliptic_demo(1), J=1, R=4, grid=TorusGrid(1, 64))
    assert res.q.order == -1.0
    for alpha in (0, 1):
        assert estimate_seminorm(res.q, (alpha,), (0,), 32, TorusGrid(1, 64)).accepted


def test_non_elliptic_symbol_is_refused():
    with pytest.raises(NotEllipticError):
        build_parametrix(discrete_laplacian(), J=1, R=4, grid=GRID)
    with pytest.raises(ValueError):
        build_parametrix(japanese_bracket(1), J=-1)


def test_residual_report_on_identity_multiplier():
    box = LatticeBox(1, 10)
    pts = box.interior_points()
    V = np.diag(1.0 / (1 + pts[:, 0] ** 2))  # Lambda_{-2}
    rep = residual_report(V, box, 0.0, (0, 2), cut=3, margin=1)
    sel = high_frequency_rows(box, 3, 1)
    assert rep.norms[0] == pytest.approx(np.max(np.diag(V)[sel]))
    assert rep.norms[2] == pytest.approx(1.0)


def test_regularity_for_multipliers_is_flat():
    for m in (1.0, 2.0):
        rep = elliptic_regularity_experiment(japanese_bracket(m), delta0, 0.0, (8, 16, 32))
        assert np.allclose(rep.norms, 1.0)
        assert rep.plateaued


def test_regularity_plateau_for_elliptic_demo():
    rep = elliptic_regularity_experiment(elliptic_demo(1), delta0, 0.0, (16, 32))
    assert rep.plateaued
    assert rep.plateau_change < 0.02


def test_slow_tail_shows_growth_one_order_up():
    def tail(p):
        return (1.0 + np.abs(p[:, 0])) ** -1.25

    rep = elliptic_regularity_experiment(japanese_bracket(1), tail, 0.0, (16, 32, 64))
    # u = Lambda_{-1} f lies in H^1 but its H^2 norm keeps growing
    assert rep.contrast[-1] > rep.contrast[-2] > rep.contrast[0]
    assert rep.contrast_change > rep.plateau_change


def test_regularity_accepts_lattice_functions_and_flags_singular_sections():
    box = LatticeBox(1, 4)
    rep = elliptic_regularity_experiment(japanese_bracket(1), LatticeFunction.delta(box), 0.0, (4, 8))
    assert rep.norms == pytest.approx([1.0, 1.0])
    sing = elliptic_regularity_experiment(constant(0.0), delta0, 0.0, (4, 8))
    assert all(sing.singular) and not sing.plateaued
    with pytest.raises(ValueError):
        elliptic_regularity_experiment(japanese_bracket(1), delta0, 0.0, (8, 8))
