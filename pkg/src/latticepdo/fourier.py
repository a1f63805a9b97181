"""Fourier analysis between Z^n and the torus T^n = R^n / Z^n.

Torus data are samples on the uniform grid x_j = m_j / M.  A torus function
is identified with the trigonometric polynomial

    f(x) = sum_xi c_xi exp(2 pi i xi . x),   c = fftn(samples) / M^n,

which is how off-grid evaluation, resampling and the falling-factorial
derivatives are defined.  For ``M`` even the Nyquist mode is assigned to the
frequency -M/2 (numpy's ``fftfreq`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBox, LatticeFunction, MultiIndex


class ConfigurationError(ValueError):
    """A grid or box combination violates the anti-aliasing requirement."""


@dataclass(frozen=True)
class TorusGrid:
    dim: int
    points_per_axis: int

    def __post_init__(self):
        if self.dim < 1 or self.points_per_axis < 1:
            raise ValueError("grid needs dim >= 1 and at least one point per axis")

    @property
    def M(self) -> int:
        return self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.dim

    @property
    def size(self) -> int:
        return self.M ** self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        """Trailing array axes holding grid data, for arrays of shape (P,) + shape."""
        return tuple(range(-self.dim, 0))

    def points(self) -> np.ndarray:
        """Grid points, shape (M^n, n), row-major over (m_1, ..., m_n)."""
        axis = np.arange(self.M) / self.M
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def frequencies(self) -> np.ndarray:
        """Integer frequency attached to each FFT slot along one axis."""
        return np.rint(np.fft.fftfreq(self.M, d=1.0 / self.M)).astype(int)

    def check_box(self, box: LatticeBox) -> None:
        if box.dim != self.dim:
            raise ConfigurationError(f"grid dimension {self.dim} != box dimension {box.dim}")
        need = 2 * box.extent + 1
        if self.M < need:
            raise ConfigurationError(
                f"torus grid with M={self.M} aliases a box of extent {box.extent}; need M >= {need}")

    @classmethod
    def for_box(cls, box: LatticeBox, minimum: int = 0) -> "TorusGrid":
        """Smallest power-of-two grid satisfying the anti-aliasing bound (and ``minimum``)."""
        need = max(2 * box.extent + 1, minimum)
        return cls(box.dim, 1 << (need - 1).bit_length())


@dataclass
class TorusFunction:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {self.grid.shape}")
        self.values = values

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "TorusFunction":
        pts = grid.points()
        return cls(grid, np.asarray(func(pts), dtype=complex).reshape(grid.shape))

    def coefficients(self) -> np.ndarray:
        return torus_coefficients(self.values, self.grid.dim)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Value of the trigonometric interpolant at points ``x`` of shape (Q, n)."""
        return evaluate_series(self.values[None], np.atleast_2d(x))[0]

    def resample(self, grid: TorusGrid) -> "TorusFunction":
        return TorusFunction(grid, resample(self.values[None], self.grid.dim, grid.M)[0])

    def integral(self) -> complex:
        """Trapezoid rule on the uniform grid."""
        return complex(np.mean(self.values))


def torus_coefficients(values: np.ndarray, dim: int) -> np.ndarray:
    """Fourier coefficients over the trailing ``dim`` axes (batch axes kept)."""
    axes = tuple(range(-dim, 0))
    M = values.shape[-1]
    return np.fft.fftn(values, axes=axes) / M ** dim


def falling_factorial(xi: np.ndarray, order: int) -> np.ndarray:
    """xi (xi - 1) ... (xi - order + 1); equal to 1 for order 0."""
    out = np.ones_like(np.asarray(xi, dtype=float))
    for r in range(order):
        out = out * (xi - r)
    return out


def falling_multiplier(M: int, beta: MultiIndex) -> np.ndarray:
    """Spectral multiplier of D^(beta) on an M^n grid in FFT slot order."""
    xi = np.rint(np.fft.fftfreq(M, d=1.0 / M))
    mult = np.ones((M,) * len(beta))
    for j, b in enumerate(beta):
        if b:
            shape = [1] * len(beta)
            shape[j] = M
            mult = mult * falling_factorial(xi, b).reshape(shape)
    return mult


def apply_falling_derivative(values: np.ndarray, beta: MultiIndex) -> np.ndarray:
    """D^(beta) applied along the trailing len(beta) axes of ``values``."""
    beta = MultiIndex(beta)
    if beta.order == 0:
        return np.asarray(values, dtype=complex)
    dim = len(beta)
    axes = tuple(range(-dim, 0))
    M = values.shape[-1]
    return np.fft.ifftn(np.fft.fftn(values, axes=axes) * falling_multiplier(M, beta), axes=axes)


def evaluate_series(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate batched trigonometric interpolants at off-grid points.

    ``values`` has shape (P,) + (M,)*n; ``x`` has shape (Q, n).  Returns (P, Q).
    """
    P = values.shape[0]
    dim = x.shape[1]
    M = values.shape[-1]
    coeffs = torus_coefficients(values, dim).reshape(P, -1)
    xi = np.rint(np.fft.fftfreq(M, d=1.0 / M))
    mesh = np.meshgrid(*([xi] * dim), indexing="ij")
    freqs = np.stack([m.ravel() for m in mesh], axis=-1)
    phase = np.exp(2j * np.pi * (x @ freqs.T))
    return coeffs @ phase.T


def resample(values: np.ndarray, dim: int, M_new: int) -> np.ndarray:
    """Move batched torus samples to an M_new^n grid through their coefficients.

    Frequencies that do not fit the new grid are dropped.
    """
    M = values.shape[-1]
    if M == M_new:
        return values
    coeffs = torus_coefficients(values, dim)
    xi_old = np.rint(np.fft.fftfreq(M, d=1.0 / M)).astype(int)
    half = (M_new - 1) // 2
    keep = np.nonzero(np.abs(xi_old) <= half)[0]
    dst = xi_old[keep] % M_new
    out = np.zeros(values.shape[:-dim] + (M_new,) * dim, dtype=complex)
    index_src = np.ix_(*([keep] * dim))
    index_dst = np.ix_(*([dst] * dim))
    out[(Ellipsis,) + index_dst] = coeffs[(Ellipsis,) + index_src]
    return np.fft.ifftn(out, axes=tuple(range(-dim, 0))) * M_new ** dim


def _lattice_slots(box: LatticeBox, M: int) -> tuple[np.ndarray, ...]:
    """FFT slot of every stored lattice point along each axis (k mod M)."""
    axis = np.arange(-box.extent, box.extent + 1) % M
    return np.ix_(*([axis] * box.dim))


def dft(u: LatticeFunction, grid: TorusGrid) -> TorusFunction:
    """u_hat(x) = sum_k exp(-2 pi i k.x) u(k), summed over the stored box."""
    grid.check_box(u.box)
    arr = np.zeros(grid.shape, dtype=complex)
    arr[_lattice_slots(u.box, grid.M)] = u.values
    return TorusFunction(grid, np.fft.fftn(arr))


def idft(f: TorusFunction, box: LatticeBox) -> LatticeFunction:
    """u(k) = int exp(2 pi i k.x) f(x) dx by the uniform trapezoid rule."""
    f.grid.check_box(box)
    full = np.fft.ifftn(f.values)
    return LatticeFunction(box, full[_lattice_slots(box, f.grid.M)])


def falling_derivative(f: TorusFunction, beta) -> TorusFunction:
    """D^(beta) f: the coefficient at frequency xi is multiplied by prod_j xi_j^(beta_j falling)."""
    beta = MultiIndex(beta)
    if len(beta) != f.grid.dim:
        raise ValueError("multi-index dimension does not match the grid")
    return TorusFunction(f.grid, apply_falling_derivative(f.values, beta))
