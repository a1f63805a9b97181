"""Multi-indices, truncated lattice boxes and forward differences on Z^n.

The infinite lattice is replaced by the box {-N..N}^n surrounded by ``halo``
extra layers.  Values are stored as an n-d array indexed row-major over
(k_1, ..., k_n) with k_j running from -(N + halo) to N + halo, so flattened
vectors and finite-section matrices always use the same lexicographic order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np


class StencilError(ValueError):
    """A difference stencil would read outside the stored box."""


class MultiIndex(tuple):
    """An n-tuple of non-negative integers."""

    def __new__(cls, entries: Sequence[int] | int):
        if isinstance(entries, (int, np.integer)):
            entries = (int(entries),)
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be >= 0, got {entries}")
        return super().__new__(cls, entries)

    @property
    def order(self) -> int:
        """|alpha| = sum of the entries."""
        return sum(self)

    @property
    def factorial(self) -> int:
        # product of the factorials, not the product of the entries
        return math.prod(math.factorial(a) for a in self)

    def power(self, k: np.ndarray) -> np.ndarray:
        """k^alpha for lattice points ``k`` of shape (..., n)."""
        k = np.asarray(k)
        out = np.ones(k.shape[:-1], dtype=float)
        for j, a in enumerate(self):
            if a:
                out = out * k[..., j].astype(float) ** a
        return out

    def __add__(self, other):
        if isinstance(other, MultiIndex):
            if len(self) != len(other):
                raise ValueError("multi-index dimensions differ")
            return MultiIndex(a + b for a, b in zip(self, other))
        return super().__add__(other)

    def __repr__(self):
        return f"MultiIndex{tuple(self)}"


def zero_index(dim: int) -> MultiIndex:
    return MultiIndex((0,) * dim)


def unit_index(dim: int, axis: int) -> MultiIndex:
    """e_axis with a 0-based ``axis``."""
    e = [0] * dim
    e[axis] = 1
    return MultiIndex(e)


def multi_indices(dim: int, order: int) -> Iterator[MultiIndex]:
    """All multi-indices with |alpha| == order, in lexicographic order."""
    for combo in itertools.product(range(order + 1), repeat=dim):
        if sum(combo) == order:
            yield MultiIndex(combo)


def multi_indices_below(dim: int, n_terms: int) -> list[MultiIndex]:
    """All multi-indices with |alpha| < n_terms, grouped by increasing order."""
    return [a for j in range(n_terms) for a in multi_indices(dim, j)]


def sub_indices(alpha: MultiIndex) -> Iterator[tuple[MultiIndex, int]]:
    """Pairs (gamma, c) with gamma <= alpha and c = (-1)^|alpha-gamma| C(alpha, gamma).

    These are the weights of the expanded forward difference
    Delta^alpha u(k) = sum_gamma c * u(k + gamma).
    """
    for gamma in itertools.product(*(range(a + 1) for a in alpha)):
        c = 1
        for a, g in zip(alpha, gamma):
            c *= math.comb(a, g) * (-1) ** (a - g)
        yield MultiIndex(gamma), c


@dataclass(frozen=True)
class LatticeBox:
    """The box {-radius..radius}^dim plus ``halo`` layers on every side."""

    dim: int
    radius: int
    halo: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.radius < 1:
            raise ValueError("box radius must be >= 1")
        if self.halo < 0:
            raise ValueError("halo must be >= 0")

    @property
    def extent(self) -> int:
        return self.radius + self.halo

    @property
    def side(self) -> int:
        return 2 * self.extent + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    @property
    def interior_side(self) -> int:
        return 2 * self.radius + 1

    @property
    def interior_size(self) -> int:
        return self.interior_side ** self.dim

    @property
    def interior_slice(self) -> tuple[slice, ...]:
        h = self.halo
        return (slice(h, h + self.interior_side),) * self.dim

    def points(self) -> np.ndarray:
        """All stored lattice points, shape (side^dim, dim), lexicographic."""
        return _grid_points(self.extent, self.dim)

    def interior_points(self) -> np.ndarray:
        """Points of {-N..N}^dim, shape ((2N+1)^dim, dim), lexicographic."""
        return _grid_points(self.radius, self.dim)

    def with_halo(self, halo: int) -> "LatticeBox":
        return LatticeBox(self.dim, self.radius, halo)


def _grid_points(extent: int, dim: int) -> np.ndarray:
    axis = np.arange(-extent, extent + 1)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def margin_mask(box: LatticeBox, margin: int) -> np.ndarray:
    """Boolean mask over interior points with max_j |k_j| <= N - margin."""
    pts = box.interior_points()
    return np.max(np.abs(pts), axis=1) <= box.radius - margin


@dataclass
class LatticeFunction:
    """Complex values on every stored point of ``box`` (halo included)."""

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.box.shape:
            raise ValueError(f"values shape {values.shape} != box shape {self.box.shape}")
        self.values = values

    @classmethod
    def zeros(cls, box: LatticeBox) -> "LatticeFunction":
        return cls(box, np.zeros(box.shape, dtype=complex))

    @classmethod
    def delta(cls, box: LatticeBox, k: Sequence[int] | None = None) -> "LatticeFunction":
        """Kronecker delta at ``k`` (origin by default)."""
        u = cls.zeros(box)
        k = (0,) * box.dim if k is None else tuple(k)
        u.values[u._index(k)] = 1.0
        return u

    @classmethod
    def from_function(cls, box: LatticeBox, func: Callable[[np.ndarray], np.ndarray]) -> "LatticeFunction":
        """Tabulate ``func`` (called on an (P, dim) array of points) over the box."""
        pts = box.points()
        return cls(box, np.asarray(func(pts), dtype=complex).reshape(box.shape))

    @classmethod
    def from_interior(cls, box: LatticeBox, vector: np.ndarray) -> "LatticeFunction":
        u = cls.zeros(box)
        u.values[box.interior_slice] = np.asarray(vector).reshape((box.interior_side,) * box.dim)
        return u

    def _index(self, k) -> tuple[int, ...]:
        k = tuple(int(c) for c in k)
        e = self.box.extent
        if len(k) != self.box.dim or any(abs(c) > e for c in k):
            raise IndexError(f"lattice point {k} outside box of extent {e}")
        return tuple(c + e for c in k)

    def __getitem__(self, k) -> complex:
        if isinstance(k, (int, np.integer)):
            k = (k,)
        return self.values[self._index(k)]

    def interior(self) -> np.ndarray:
        """Values on {-N..N}^dim as a flat lexicographic vector."""
        return self.values[self.box.interior_slice].ravel()

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        if other.box != self.box:
            raise ValueError("lattice functions live on different boxes")
        return LatticeFunction(self.box, self.values + other.values)

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        return self + (-1.0) * other

    def __mul__(self, c) -> "LatticeFunction":
        return LatticeFunction(self.box, self.values * c)

    __rmul__ = __mul__


def forward_difference(u: LatticeFunction, alpha: MultiIndex | Sequence[int]) -> LatticeFunction:
    """Delta^alpha u, with Delta_j u(k) = u(k + e_j) - u(k).

    The result lives on the same box with the halo reduced by |alpha|.
    """
    alpha = MultiIndex(alpha)
    box = u.box
    if len(alpha) != box.dim:
        raise ValueError("multi-index dimension does not match the box")
    if alpha.order > box.halo:
        raise StencilError(f"halo {box.halo} too small for a difference of order {alpha.order}")
    out_box = box.with_halo(box.halo - alpha.order)
    lo = alpha.order
    side = out_box.side
    out = np.zeros(out_box.shape, dtype=complex)
    for gamma, c in sub_indices(alpha):
        sl = tuple(slice(lo + g, lo + g + side) for g in gamma)
        out += c * u.values[sl]
    return LatticeFunction(out_box, out)


def schwartz_seminorm(u: LatticeFunction, alpha, beta) -> float:
    """max over the interior of |k^alpha (Delta^beta u)(k)|."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    d = forward_difference(u, beta)
    vals = d.values[d.box.interior_slice].ravel()
    k = d.box.interior_points()
    return float(np.max(np.abs(alpha.power(k) * vals)))
