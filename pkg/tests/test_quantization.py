import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticepdo.fourier import TorusGrid
from latticepdo.lattice import LatticeBox, LatticeFunction
from latticepdo.quantization import (FiniteSectionOperator, SobolevSpec, apply, finite_section, formal_adjoint,
                                     multiplier_section, operator_norm_estimate, sobolev_norm, weighted_adjoint)
from latticepdo.symbols import axis_shift, constant, elliptic_demo, japanese_bracket, perturbed, trig_poly


def kernel_oracle(a, box, M=256):
    """K(k, l) = int exp(2 pi i (k - l).x) a(k, x) dx by a fine midpoint rule (exact for low x-degree)."""
    x = (np.arange(M) / M)[:, None] if box.dim == 1 else None
    pts = box.interior_points()
    vals = a(pts, x)
    phase = np.exp(2j * np.pi * (pts[:, None, 0] - pts[None, :, 0])[:, :, None] * x[None, None, :, 0])
    return np.mean(vals[:, None, :] * phase, axis=2)


def test_section_agrees_with_quadrature_oracle():
    box, grid = LatticeBox(1, 8), TorusGrid(1, 32)
    for a in (elliptic_demo(1), japanese_bracket(1) * axis_shift(), perturbed(0.5, {2: 0.3, -1: 0.1j})):
        A = finite_section(a, box, grid).matrix
        assert np.allclose(A, kernel_oracle(a, box), atol=1e-12)


def test_apply_agrees_with_direct_double_sum():
    rng = np.random.default_rng(0)
    box, grid = LatticeBox(1, 6), TorusGrid(1, 32)
    u = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
    a = elliptic_demo(1) + japanese_bracket(0.5) * axis_shift(sign=-1)
    K = kernel_oracle(a, box)
    assert np.allclose(apply(a, u, grid).values, K @ u.values, atol=1e-11)
    assert np.allclose(finite_section(a, box, grid) @ u.interior(), K @ u.values, atol=1e-11)


def test_shift_moves_the_sequence():
    box, grid = LatticeBox(1, 10, 1), TorusGrid(1, 32)
    u = LatticeFunction.from_function(box, lambda k: k[:, 0] ** 2 + 1.0)
    out = apply(axis_shift(), u, grid)
    k = box.interior_points()[:, 0]
    assert np.allclose(out.interior()[:, ], (k + 1) ** 2 + 1.0)


def test_multiplier_sections_are_diagonal():
    box, grid = LatticeBox(1, 12), TorusGrid(1, 32)
    for s in (-1.5, 0.0, 2.0):
        A = finite_section(japanese_bracket(s), box, grid)
        assert np.allclose(A.matrix, multiplier_section(box, s).matrix, atol=1e-13)
    assert np.allclose(finite_section(constant(1.0), box, grid).matrix, np.eye(box.interior_size), atol=1e-15)


def test_cosine_kernel():
    box, grid = LatticeBox(1, 5), TorusGrid(1, 16)
    A = finite_section(trig_poly({1: 0.5, -1: 0.5}), box, grid).matrix
    assert np.allclose(A, 0.5 * (np.eye(11, k=1) + np.eye(11, k=-1)), atol=1e-15)


def test_sobolev_norm_examples():
    box = LatticeBox(1, 6)
    assert sobolev_norm(LatticeFunction.delta(box), 3.0) == pytest.approx(1.0)
    assert sobolev_norm(LatticeFunction.delta(box, (1,)), 2.0) == pytest.approx(2.0)
    assert sobolev_norm(LatticeFunction.delta(box, (2,)), -1.0) == pytest.approx(5 ** -0.5)


def test_operator_norm_examples():
    box, grid = LatticeBox(1, 16), TorusGrid(1, 64)
    assert operator_norm_estimate(finite_section(japanese_bracket(2), box, grid)) == pytest.approx(257.0)
    assert operator_norm_estimate(finite_section(japanese_bracket(2), box, grid, 2.0, 0.0)) == pytest.approx(1.0)
    assert operator_norm_estimate(finite_section(axis_shift(), box, grid)) == pytest.approx(1.0)


def test_weighted_adjoint_tags_and_involution():
    box, grid = LatticeBox(1, 8), TorusGrid(1, 32)
    A = finite_section(elliptic_demo(1), box, grid, 0.5, -0.5)
    B = weighted_adjoint(A)
    assert (B.source.s, B.target.s) == (-0.5, 0.5)
    assert np.allclose(weighted_adjoint(B).matrix, A.matrix)
    F = formal_adjoint(A)
    assert (F.source.s, F.target.s) == (0.5, -0.5)
    assert np.allclose(F.matrix, A.matrix.conj().T)


def test_weighted_adjoint_is_adjoint_for_weighted_products():
    rng = np.random.default_rng(4)
    box, grid = LatticeBox(1, 8), TorusGrid(1, 32)
    A = finite_section(perturbed(1, {1: 0.3}), box, grid, 1.0, 0.0)
    B = weighted_adjoint(A)
    u, v = (rng.standard_normal(17) + 1j * rng.standard_normal(17) for _ in range(2))
    w = lambda s: A.weights(s) ** 2  # noqa: E731
    lhs = np.sum(w(0.0) * (A.matrix @ u) * np.conj(v))
    rhs = np.sum(w(1.0) * u * np.conj(B.matrix @ v))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_composition_tags_and_shape_checks():
    box = LatticeBox(1, 3)
    A = FiniteSectionOperator(box, np.eye(7), SobolevSpec(1), SobolevSpec(0))
    B = FiniteSectionOperator(box, np.eye(7), SobolevSpec(2), SobolevSpec(1))
    C = A @ B
    assert (C.source.s, C.target.s) == (2, 0)
    with pytest.raises(ValueError):
        FiniteSectionOperator(box, np.eye(6))


def test_boundedness_stabilizes_with_box_size():
    a, s = elliptic_demo(1), 0.5
    norms = [operator_norm_estimate(finite_section(a, LatticeBox(1, N), TorusGrid(1, 128), s, s - 1))
             for N in (16, 32)]
    assert abs(norms[1] - norms[0]) / norms[0] < 0.05


coef = st.floats(-1, 1)


@given(coef, coef, st.floats(-1.5, 1.5))
def test_apply_and_section_agree(c1, c2, m):
    box, grid = LatticeBox(1, 6), TorusGrid(1, 16)
    a = japanese_bracket(m) * trig_poly({0: 1.0, 1: c1, -2: c2 * 1j})
    u = LatticeFunction.from_function(box, lambda k: np.cos(k[:, 0]) + 1j * c1)
    assert np.allclose(apply(a, u, grid).values, finite_section(a, box, grid) @ u.values, atol=1e-11)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_double_weighted_adjoint_is_identity(s1, s2):
    box, grid = LatticeBox(1, 5), TorusGrid(1, 16)
    A = finite_section(elliptic_demo(0.5) * axis_shift(), box, grid, s1, s2)
    assert np.allclose(weighted_adjoint(weighted_adjoint(A)).matrix, A.matrix, rtol=1e-12, atol=1e-12)
