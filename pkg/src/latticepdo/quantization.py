"""Quantization of symbols on Z^n and finite sections between Sobolev spaces.

    (T_a u)(k) = int_{T^n} exp(2 pi i k.x) a(k, x) u_hat(x) dx

The finite section on {-N..N}^n has kernel K(k, l) = c_{l-k}(a(k, .)), the
Fourier coefficient of a(k, .) at frequency l - k.  Because Lambda_s does not
depend on x, T_{Lambda_s} is the multiplier k -> Lambda_s(k); H^s is therefore
realized as l^2 rescaled by the diagonal D_s = diag(Lambda_s(k)).

Trigonometric-polynomial symbols of x-degree d are reproduced exactly when the
grid satisfies M > 2N + d (no aliasing of kernel frequencies).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .fourier import TorusGrid, dft, torus_coefficients
from .lattice import LatticeBox, LatticeFunction, margin_mask
from .symbols import Symbol, japanese_weight


@dataclass(frozen=True)
class SobolevSpec:
    s: float = 0.0

    def weight(self, k: np.ndarray) -> np.ndarray:
        return japanese_weight(k, self.s)


@dataclass
class FiniteSectionOperator:
    """Dense matrix over the interior points of ``box``, mapping H^source -> H^target."""

    box: LatticeBox
    matrix: np.ndarray
    source: SobolevSpec = field(default_factory=SobolevSpec)
    target: SobolevSpec = field(default_factory=SobolevSpec)
    margin: int = 0

    def __post_init__(self):
        n = self.box.interior_size
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} interior points")

    @property
    def points(self) -> np.ndarray:
        return self.box.interior_points()

    def weights(self, s: float) -> np.ndarray:
        return japanese_weight(self.points, s)

    def interior_mask(self, margin: int | None = None) -> np.ndarray:
        return margin_mask(self.box, self.margin if margin is None else margin)

    def weighted_matrix(self) -> np.ndarray:
        """D_target A D_source^{-1}: the matrix in the orthonormalized weighted bases."""
        return self.weights(self.target.s)[:, None] * self.matrix / self.weights(self.source.s)[None, :]

    def __matmul__(self, other):
        if isinstance(other, FiniteSectionOperator):
            if other.box != self.box:
                raise ValueError("finite sections on different boxes")
            return FiniteSectionOperator(self.box, self.matrix @ other.matrix, other.source, self.target,
                                         max(self.margin, other.margin))
        if isinstance(other, LatticeFunction):
            return LatticeFunction.from_interior(self.box, self.matrix @ other.interior())
        return self.matrix @ other

    def with_margin(self, margin: int) -> "FiniteSectionOperator":
        return replace(self, margin=int(margin))

    def save_csv(self, path) -> None:
        """Long-format dump: one line per entry, rows and columns in lexicographic k order."""
        pts = self.points
        dim = self.box.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "col"] + [f"k{j + 1}" for j in range(dim)] + [f"l{j + 1}" for j in range(dim)]
                       + ["real", "imag"])
            for i in range(len(pts)):
                for j in range(len(pts)):
                    z = self.matrix[i, j]
                    w.writerow([i, j, *pts[i], *pts[j], repr(z.real), repr(z.imag)])

    def save_npy(self, path) -> None:
        np.save(Path(path), self.matrix)


def _check(a: Symbol, box: LatticeBox, grid: TorusGrid):
    grid.check_box(box)
    if a.dim != box.dim:
        raise ValueError(f"symbol dimension {a.dim} != box dimension {box.dim}")


def apply(a: Symbol, u: LatticeFunction, grid: TorusGrid) -> LatticeFunction:
    """T_a u at every stored point of u's box, by the DFT and per-k quadrature."""
    box = u.box
    _check(a, box, grid)
    u_hat = dft(u, grid).values.ravel()
    k = box.points()
    x = grid.points()
    samples = a.sample(k, grid).reshape(len(k), -1)
    phase = np.exp(2j * np.pi * (k @ x.T))
    out = (samples * phase) @ u_hat / grid.size
    return LatticeFunction(box, out.reshape(box.shape))


def finite_section(a: Symbol, box: LatticeBox, grid: TorusGrid, s1: float = 0.0, s2: float = 0.0,
                   margin: int = 0) -> FiniteSectionOperator:
    """Matrix of T_a on the interior of ``box``; column l is T_a delta_l."""
    _check(a, box, grid)
    k = box.interior_points()
    coeffs = torus_coefficients(a.sample(k, grid), box.dim).reshape(len(k), -1)
    offsets = (k[None, :, :] - k[:, None, :]) % grid.M
    slots = np.ravel_multi_index(tuple(np.moveaxis(offsets, -1, 0)), grid.shape)
    matrix = np.take_along_axis(coeffs, slots, axis=1)
    return FiniteSectionOperator(box, matrix, SobolevSpec(s1), SobolevSpec(s2), margin)


def multiplier_section(box: LatticeBox, s: float, s1: float = 0.0, s2: float = 0.0) -> FiniteSectionOperator:
    """diag(Lambda_s) directly from the weights."""
    return FiniteSectionOperator(box, np.diag(japanese_weight(box.interior_points(), s)).astype(complex),
                                 SobolevSpec(s1), SobolevSpec(s2))


def sobolev_norm(u: LatticeFunction, s: float) -> float:
    """||u||_{H^s} = || Lambda_s u ||_{l^2} over every stored point."""
    return float(np.linalg.norm(japanese_weight(u.box.points(), s) * u.flat()))


def operator_norm_estimate(A: FiniteSectionOperator) -> float:
    """Largest singular value of D_{s2} A D_{s1}^{-1}."""
    return float(np.linalg.norm(A.weighted_matrix(), 2))


def weighted_adjoint(A: FiniteSectionOperator) -> FiniteSectionOperator:
    """Adjoint for the weighted inner products (u, v)_{H^s} = sum Lambda_s^2 u conj(v).

    A maps H^{s1} -> H^{s2}; the result D_{s1}^{-2} A^H D_{s2}^{2} maps H^{s2} -> H^{s1}.
    """
    w1 = A.weights(A.source.s) ** 2
    w2 = A.weights(A.target.s) ** 2
    mat = A.matrix.conj().T * w2[None, :] / w1[:, None]
    return FiniteSectionOperator(A.box, mat, A.target, A.source, A.margin)


def formal_adjoint(A: FiniteSectionOperator) -> FiniteSectionOperator:
    """The l^2 conjugate transpose, tagged H^{-s2} -> H^{-s1}."""
    return FiniteSectionOperator(A.box, A.matrix.conj().T, SobolevSpec(-A.target.s), SobolevSpec(-A.source.s),
                                 A.margin)


def frequency_shells(points: np.ndarray) -> np.ndarray:
    """Integer shell index round(|k|) for each point."""
    return np.rint(np.sqrt(np.sum(points.astype(float) ** 2, axis=1))).astype(int)
