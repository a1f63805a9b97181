import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticepdo.lattice import (LatticeBox, LatticeFunction, MultiIndex, StencilError, forward_difference,
                                margin_mask, multi_indices, multi_indices_below, schwartz_seminorm, sub_indices)


def test_multi_index_order_and_factorial():
    a = MultiIndex((2, 0, 3))
    assert a.order == 5
    assert a.factorial == 2 * 6  # 0! = 1 keeps zero entries harmless
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_multi_index_enumeration_counts():
    # number of alpha in N_0^n with |alpha| = j is C(j + n - 1, n - 1)
    for dim in (1, 2, 3):
        for j in range(5):
            assert len(list(multi_indices(dim, j))) == math.comb(j + dim - 1, dim - 1)
    assert len(multi_indices_below(2, 3)) == 1 + 2 + 3


def test_sub_indices_reproduce_binomial_stencil():
    coeffs = dict(sub_indices(MultiIndex((3,))))
    assert coeffs == {(0,): -1, (1,): 3, (2,): -3, (3,): 1}


def test_box_geometry():
    box = LatticeBox(2, 3, halo=1)
    assert box.side == 9
    assert box.interior_size == 49
    pts = box.interior_points()
    assert pts[0].tolist() == [-3, -3] and pts[1].tolist() == [-3, -2]
    assert margin_mask(box, 1).sum() == 25


def _box1(N=10, halo=3):
    return LatticeBox(1, N, halo)


def test_difference_of_constant_vanishes():
    u = LatticeFunction.from_function(_box1(), lambda k: np.ones(len(k)))
    assert np.all(forward_difference(u, (1,)).values == 0)


def test_difference_of_identity_is_one():
    u = LatticeFunction.from_function(_box1(), lambda k: k[:, 0])
    assert np.allclose(forward_difference(u, (1,)).values, 1.0)


def test_second_difference_of_square_enumerated():
    box = _box1()
    u = LatticeFunction.from_function(box, lambda k: k[:, 0] ** 2)
    d = forward_difference(u, (2,))
    ks = d.box.points()[:, 0]
    oracle = [(k + 2) ** 2 - 2 * (k + 1) ** 2 + k ** 2 for k in ks]
    assert np.array_equal(d.values.real, np.array(oracle, dtype=float))
    assert np.all(d.values == 2)
    assert d.box.halo == box.halo - 2


def test_insufficient_halo_is_a_stencil_error():
    u = LatticeFunction.zeros(LatticeBox(1, 4, 1))
    with pytest.raises(StencilError):
        forward_difference(u, (2,))
    with pytest.raises(StencilError):
        schwartz_seminorm(u, (0,), (2,))


def test_seminorm_examples():
    box = LatticeBox(1, 12, 2)
    delta = LatticeFunction.delta(box)
    assert schwartz_seminorm(delta, (0,), (0,)) == 1.0
    assert schwartz_seminorm(delta, (1,), (0,)) == 0.0
    u = LatticeFunction.from_function(box, lambda k: 2.0 ** -np.abs(k[:, 0]))
    oracle = max(abs(k) * 2.0 ** -abs(k) for k in range(-12, 13))
    assert schwartz_seminorm(u, (1,), (0,)) == pytest.approx(oracle) == pytest.approx(0.5)


def test_two_dimensional_mixed_difference():
    box = LatticeBox(2, 4, 2)
    u = LatticeFunction.from_function(box, lambda k: k[:, 0] * k[:, 1])
    # Delta_1 Delta_2 (k1 k2) = 1
    assert np.allclose(forward_difference(u, (1, 1)).values, 1.0)


values = st.lists(st.floats(-1e3, 1e3), min_size=15, max_size=15)


@given(values, values, st.floats(-10, 10), st.integers(0, 3))
def test_difference_is_linear(a, b, c, order):
    box = LatticeBox(1, 4, 3)
    u, v = LatticeFunction(box, np.array(a)), LatticeFunction(box, np.array(b))
    lhs = forward_difference(u + c * v, (order,)).values
    rhs = forward_difference(u, (order,)).values + c * forward_difference(v, (order,)).values
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


@given(values, st.integers(0, 2), st.integers(0, 2))
def test_differences_compose(a, p, q):
    box = LatticeBox(1, 3, 4)
    u = LatticeFunction(box, np.array(a))
    lhs = forward_difference(forward_difference(u, (p,)), (q,))
    rhs = forward_difference(u, (p + q,))
    assert lhs.box == rhs.box
    assert np.allclose(lhs.values, rhs.values, atol=1e-9 * (1 + np.abs(u.values).max()))


@given(values, st.floats(-50, 50))
def test_seminorm_is_absolutely_homogeneous(a, c):
    box = LatticeBox(1, 5, 2)
    u = LatticeFunction(box, np.array(a))
    lhs = schwartz_seminorm(u * c, (1,), (1,))
    assert lhs == pytest.approx(abs(c) * schwartz_seminorm(u, (1,), (1,)), rel=1e-12, abs=1e-9)
