"""Symbols a(k, x) on Z^n x T^n with a declared order.

Every symbol answers two questions:

* ``sym(k, x)`` -- values at lattice points ``k`` (P, n) and torus points
  ``x`` (Q, n), returned as a (P, Q) complex array;
* ``sym.sample(k, grid)`` -- values on a whole torus grid for each k, shape
  (P,) + grid.shape.  Spectral operations (falling-factorial derivatives,
  quantization) consume this form.

Closed-form symbols evaluate anywhere.  Derived symbols that need spectral
derivatives compute on their own grid and interpolate through the Fourier
series when asked for anything else.  Symbols are immutable.
"""

from __future__ import annotations

import ast
import copy
import math
from typing import Callable, Mapping

import numpy as np

from .fourier import TorusGrid, evaluate_series, resample
from .lattice import LatticeBox, MultiIndex, sub_indices


class DimensionMismatch(ValueError):
    pass


def as_points(k, dim: int) -> np.ndarray:
    """Normalize lattice points to an integer array of shape (P, dim)."""
    k = np.asarray(k)
    if k.ndim == 0:
        k = k.reshape(1, 1)
    elif k.ndim == 1:
        k = k.reshape(-1, 1) if dim == 1 else k.reshape(1, -1)
    if k.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got shape {k.shape}")
    return k.astype(np.int64)


def as_torus_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, 1) if dim == 1 else x.reshape(1, -1)
    if x.shape[1] != dim:
        raise DimensionMismatch(f"expected torus points of dimension {dim}, got shape {x.shape}")
    return x


def japanese_weight(k: np.ndarray, s: float) -> np.ndarray:
    """Lambda_s(k) = (1 + |k|^2)^(s/2) for points of shape (..., n)."""
    k = np.asarray(k, dtype=float)
    return (1.0 + np.sum(k * k, axis=-1)) ** (0.5 * s)


def smooth_cutoff(t: np.ndarray) -> np.ndarray:
    """C^2 smoothstep: 0 on [0, 1], 1 on [2, inf), 6s^5 - 15s^4 + 10s^3 between."""
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


class Symbol:
    kind = "closed-form"

    def __init__(self, dim: int, order: float, name: str = "", meta: dict | None = None):
        self.dim = int(dim)
        self.order = float(order)
        self.name = name
        self.meta = dict(meta or {})
        self._declared = None

    # -- evaluation -------------------------------------------------------
    def _at(self, k: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, k, x) -> np.ndarray:
        k = as_points(k, self.dim)
        x = as_torus_points(x, self.dim)
        out = np.asarray(self._at(k, x), dtype=complex)
        return np.broadcast_to(out, (k.shape[0], x.shape[0])).copy()

    def sample(self, k, grid: TorusGrid) -> np.ndarray:
        k = as_points(k, self.dim)
        self._check_grid(grid)
        return self(k, grid.points()).reshape((k.shape[0],) + grid.shape)

    def _check_grid(self, grid: TorusGrid):
        if grid.dim != self.dim:
            raise DimensionMismatch(f"grid dimension {grid.dim} != symbol dimension {self.dim}")

    # -- bookkeeping ------------------------------------------------------
    def with_order(self, order: float) -> "Symbol":
        """The same symbol re-declared with another order."""
        other = copy.copy(self)
        other.order = float(order)
        other._declared = float(order)
        return other

    def describe(self) -> dict:
        desc = self._describe()
        if self._declared is not None:
            desc = dict(desc, order=self._declared)
        return desc

    def _describe(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no description")

    def __repr__(self):
        label = self.name or type(self).__name__
        return f"<{self.kind} symbol {label}, dim={self.dim}, order={self.order:g}>"

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        return symbol_add(self, _lift(other, self.dim))

    __radd__ = __add__

    def __sub__(self, other):
        return symbol_add(self, ScaledSymbol(-1.0, _lift(other, self.dim)))

    def __rsub__(self, other):
        return symbol_add(_lift(other, self.dim), ScaledSymbol(-1.0, self))

    def __neg__(self):
        return ScaledSymbol(-1.0, self)

    def __mul__(self, other):
        if np.isscalar(other):
            return ScaledSymbol(other, self)
        return symbol_mul(self, other)

    def __rmul__(self, other):
        if np.isscalar(other):
            return ScaledSymbol(other, self)
        return symbol_mul(other, self)

    def conj(self) -> "Symbol":
        return ConjugateSymbol(self)


def _lift(obj, dim: int) -> Symbol:
    if isinstance(obj, Symbol):
        return obj
    if np.isscalar(obj):
        return constant(obj, dim)
    raise TypeError(f"cannot combine a symbol with {type(obj).__name__}")


def _combined_kind(operands) -> str:
    kinds = {op.kind for op in operands}
    if "derived" in kinds:
        return "derived"
    if "tabulated" in kinds:
        return "tabulated"
    return "closed-form"


class ClosedFormSymbol(Symbol):
    """A symbol given by a broadcasting function ``func(k, x)``.

    ``func`` receives k of shape (P, 1, n) (integers) and x of shape
    (1, Q, n) and returns anything broadcastable to (P, Q).
    """

    def __init__(self, func: Callable, dim: int, order: float, name: str = "",
                 description: dict | None = None, x_independent: bool = False, meta=None):
        super().__init__(dim, order, name, meta)
        self.func = func
        self.description = description
        self.x_independent = x_independent

    def _at(self, k, x):
        return self.func(k[:, None, :], x[None, :, :])

    def _describe(self):
        if self.description is None:
            raise NotImplementedError(f"closed-form symbol {self.name!r} has no description")
        return dict(self.description)


class SpectralSymbol(Symbol):
    """Base for symbols computed on their own torus grid."""

    kind = "derived"

    def __init__(self, dim, order, grid: TorusGrid, name="", meta=None):
        super().__init__(dim, order, name, meta)
        self.grid = grid

    def _sample_own(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, k, grid: TorusGrid) -> np.ndarray:
        k = as_points(k, self.dim)
        self._check_grid(grid)
        vals = self._sample_own(k)
        if grid.M != self.grid.M:
            vals = resample(vals, self.dim, grid.M)
        return vals

    def _at(self, k, x):
        return evaluate_series(self._sample_own(k), x)


class SumSymbol(Symbol):
    def __init__(self, terms):
        terms = list(terms)
        super().__init__(terms[0].dim, max(t.order for t in terms), name="sum")
        self.terms = terms
        self.kind = _combined_kind(terms)

    def _at(self, k, x):
        return sum(t._at(k, x) for t in self.terms)

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        return sum(t.sample(k, grid) for t in self.terms)

    def _describe(self):
        return {"sum": [t.describe() for t in self.terms]}


class ProductSymbol(Symbol):
    def __init__(self, factors):
        factors = list(factors)
        super().__init__(factors[0].dim, sum(f.order for f in factors), name="product")
        self.factors = factors
        self.kind = _combined_kind(factors)

    def _at(self, k, x):
        out = self.factors[0]._at(k, x)
        for f in self.factors[1:]:
            out = out * f._at(k, x)
        return out

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        out = self.factors[0].sample(k, grid)
        for f in self.factors[1:]:
            out = out * f.sample(k, grid)
        return out

    def _describe(self):
        return {"product": [f.describe() for f in self.factors]}


class ScaledSymbol(Symbol):
    def __init__(self, scale, base: Symbol):
        super().__init__(base.dim, base.order, name="scaled")
        self.scale = complex(scale)
        self.base = base
        self.kind = base.kind

    def _at(self, k, x):
        return self.scale * self.base._at(k, x)

    def sample(self, k, grid):
        return self.scale * self.base.sample(k, grid)

    def _describe(self):
        return {"scale": [self.scale.real, self.scale.imag], "of": self.base.describe()}


class ConjugateSymbol(Symbol):
    def __init__(self, base: Symbol):
        super().__init__(base.dim, base.order, name="conj")
        self.base = base
        self.kind = base.kind

    def _at(self, k, x):
        return np.conj(self.base._at(k, x))

    def sample(self, k, grid):
        return np.conj(self.base.sample(k, grid))

    def _describe(self):
        return {"conj": self.base.describe()}


class DifferencedSymbol(Symbol):
    """Delta_k^alpha of ``base``, taken on the evaluator (no halo loss)."""

    def __init__(self, base: Symbol, alpha):
        alpha = MultiIndex(alpha)
        if len(alpha) != base.dim:
            raise DimensionMismatch("multi-index dimension does not match the symbol")
        super().__init__(base.dim, base.order - alpha.order, name="difference")
        self.base = base
        self.alpha = alpha
        self.kind = base.kind
        self._stencil = list(sub_indices(alpha))

    def _at(self, k, x):
        return sum(c * self.base._at(k + np.asarray(g), x) for g, c in self._stencil)

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        return sum(c * self.base.sample(k + np.asarray(g), grid) for g, c in self._stencil)

    def _describe(self):
        return {"difference": list(self.alpha), "of": self.base.describe()}


class CutoffSymbol(Symbol):
    """chi(|k| / R) * base, with chi the smoothstep cutoff; R = 0 means no cutoff."""

    def __init__(self, base: Symbol, radius: float):
        super().__init__(base.dim, base.order, name="cutoff")
        self.base = base
        self.radius = float(radius)
        self.kind = base.kind

    def weight(self, k: np.ndarray) -> np.ndarray:
        if self.radius <= 0:
            return np.ones(k.shape[0])
        return smooth_cutoff(np.sqrt(np.sum(k.astype(float) ** 2, axis=-1)) / self.radius)

    def _at(self, k, x):
        return self.weight(k)[:, None] * self.base._at(k, x)

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        w = self.weight(k).reshape((-1,) + (1,) * self.dim)
        return w * self.base.sample(k, grid)

    def _describe(self):
        return {"cutoff": self.radius, "of": self.base.describe()}


class ExcisedInverseSymbol(Symbol):
    """chi(|k| / R) * conj(b) / (|b|^2 + eps), set to 0 where the cutoff vanishes."""

    def __init__(self, base: Symbol, radius: float, eps: float = 0.0):
        super().__init__(base.dim, -base.order, name="excised_inverse")
        self.base = base
        self.radius = float(radius)
        self.eps = float(eps)
        self.kind = base.kind

    def _combine(self, w, b):
        w = np.broadcast_to(w, b.shape)
        out = np.zeros(b.shape, dtype=complex)
        live = w > 0
        denom = np.abs(b[live]) ** 2 + self.eps
        out[live] = w[live] * np.conj(b[live]) / denom
        return out

    def _weight(self, k):
        return CutoffSymbol(self.base, self.radius).weight(k)

    def _at(self, k, x):
        b = np.broadcast_to(self.base._at(k, x), (k.shape[0], x.shape[0]))
        return self._combine(self._weight(k)[:, None], b)

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        b = self.base.sample(k, grid)
        w = self._weight(k).reshape((-1,) + (1,) * self.dim)
        return self._combine(w, b)

    def _describe(self):
        return {"excised_inverse": {"radius": self.radius, "eps": self.eps}, "of": self.base.describe()}


class TabulatedSymbol(Symbol):
    """Per-k torus samples stored over a lattice box (halo included)."""

    kind = "tabulated"

    def __init__(self, box: LatticeBox, grid: TorusGrid, table: np.ndarray, order: float, name="tabulated"):
        super().__init__(box.dim, order, name)
        grid.check_box(box)
        table = np.asarray(table, dtype=complex)
        if table.shape != (box.side ** box.dim,) + grid.shape:
            raise ValueError("table shape does not match box and grid")
        self.box = box
        self.grid = grid
        self.table = table

    def _rows(self, k):
        e = self.box.extent
        if np.any(np.abs(k) > e):
            raise IndexError(f"tabulated symbol queried outside its box of extent {e}")
        return np.ravel_multi_index(tuple((k + e).T), self.box.shape)

    def sample(self, k, grid):
        k = as_points(k, self.dim)
        vals = self.table[self._rows(k)]
        if grid.M != self.grid.M:
            vals = resample(vals, self.dim, grid.M)
        return vals

    def _at(self, k, x):
        return evaluate_series(self.table[self._rows(k)], x)

    def _describe(self):
        return {"tabulated": {
            "radius": self.box.radius, "halo": self.box.halo, "M": self.grid.M,
            "order": self.order,
            "real": self.table.real.tolist(), "imag": self.table.imag.tolist()}}


def tabulate(sym: Symbol, box: LatticeBox, grid: TorusGrid) -> TabulatedSymbol:
    return TabulatedSymbol(box, grid, sym.sample(box.points(), grid), sym.order, name=f"tabulated {sym.name}")


def symbol_add(a: Symbol, b: Symbol) -> Symbol:
    """Pointwise sum; declared order max(m1, m2)."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot add symbols of dimensions {a.dim} and {b.dim}")
    terms = (a.terms if isinstance(a, SumSymbol) else [a]) + (b.terms if isinstance(b, SumSymbol) else [b])
    return SumSymbol(terms)


def symbol_mul(a: Symbol, b: Symbol) -> Symbol:
    """Pointwise product; declared order m1 + m2."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot multiply symbols of dimensions {a.dim} and {b.dim}")
    return ProductSymbol([a, b])


# -- built-in library ------------------------------------------------------

def constant(c, dim: int = 1) -> ClosedFormSymbol:
    c = complex(c)
    return ClosedFormSymbol(lambda k, x: np.full((1, 1), c), dim, 0.0, name=f"constant({c:g})",
                            description={"builtin": "constant", "params": {"c": [c.real, c.imag]}, "dim": dim},
                            x_independent=True)


def japanese_bracket(s: float, dim: int = 1) -> ClosedFormSymbol:
    """Lambda_s(k) = (1 + |k|^2)^(s/2), of order s."""
    s = float(s)
    return ClosedFormSymbol(lambda k, x: japanese_weight(k, s), dim, s, name=f"japanese_bracket({s:g})",
                            description={"builtin": "japanese_bracket", "params": {"s": s}, "dim": dim},
                            x_independent=True)


def axis_shift(axis: int = 1, sign: int = 1, dim: int = 1) -> ClosedFormSymbol:
    """exp(+-2 pi i x_axis) with a 1-based ``axis``; quantizes to u(k +- e_axis)."""
    if not 1 <= axis <= dim:
        raise ValueError(f"axis must be in 1..{dim}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    j = axis - 1
    return ClosedFormSymbol(lambda k, x: np.exp(2j * np.pi * sign * x[..., j]), dim, 0.0,
                            name=f"axis_shift({axis},{'+' if sign > 0 else '-'})",
                            description={"builtin": "axis_shift", "params": {"axis": axis, "sign": sign}, "dim": dim})


def _frequency_table(coeffs: Mapping, dim: int) -> tuple[np.ndarray, np.ndarray]:
    freqs, values = [], []
    for key, c in coeffs.items():
        if isinstance(key, str):
            key = tuple(int(p) for p in key.replace("(", "").replace(")", "").split(",") if p.strip())
        if isinstance(key, (int, np.integer)):
            key = (int(key),)
        if len(key) != dim:
            raise ValueError(f"frequency {key} does not have dimension {dim}")
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        freqs.append(key)
        values.append(complex(c))
    return np.asarray(freqs, dtype=float).reshape(-1, dim), np.asarray(values)


def trig_poly(coeffs: Mapping, dim: int = 1) -> ClosedFormSymbol:
    """sum_xi c_xi exp(2 pi i xi.x); ``coeffs`` maps frequencies to coefficients."""
    freqs, vals = _frequency_table(coeffs, dim)

    def func(k, x):
        phase = np.exp(2j * np.pi * np.tensordot(x, freqs.T, axes=1))
        return phase @ vals

    stored = {",".join(str(int(f)) for f in fr): [float(v.real), float(v.imag)] for fr, v in zip(freqs, vals)}
    return ClosedFormSymbol(func, dim, 0.0, name="trig_poly",
                            description={"builtin": "trig_poly", "params": {"coeffs": stored}, "dim": dim})


def discrete_laplacian(dim: int = 1) -> ClosedFormSymbol:
    """sum_j 2 (cos 2 pi x_j - 1); order 0 and not elliptic."""
    return ClosedFormSymbol(lambda k, x: np.sum(2.0 * (np.cos(2 * np.pi * x) - 1.0), axis=-1), dim, 0.0,
                            name="discrete_laplacian",
                            description={"builtin": "discrete_laplacian", "params": {}, "dim": dim})


def elliptic_demo(m: float, dim: int = 1) -> ClosedFormSymbol:
    """Lambda_m(k) (2 + cos 2 pi x_1)."""
    m = float(m)
    return ClosedFormSymbol(lambda k, x: japanese_weight(k, m) * (2.0 + np.cos(2 * np.pi * x[..., 0])), dim, m,
                            name=f"elliptic_demo({m:g})",
                            description={"builtin": "elliptic_demo", "params": {"m": m}, "dim": dim})


def perturbed(m: float, coeffs: Mapping, drop: float = 1.0, dim: int = 1) -> Symbol:
    """Lambda_m(k) + Lambda_{m-drop}(k) * trig_poly(coeffs), declared of order m."""
    m, drop = float(m), float(drop)
    if drop <= 0:
        raise ValueError("the perturbation must be of strictly lower order (drop > 0)")
    tp = trig_poly(coeffs, dim)

    def func(k, x):
        return japanese_weight(k, m) + japanese_weight(k, m - drop) * tp.func(k, x)

    return ClosedFormSymbol(func, dim, m, name=f"perturbed({m:g})",
                            description={"builtin": "perturbed",
                                         "params": {"m": m, "drop": drop, "coeffs": tp.description["params"]["coeffs"]},
                                         "dim": dim})


BUILTINS = {
    "constant": lambda dim, c=1.0: constant(complex(*c) if isinstance(c, (list, tuple)) else c, dim),
    "japanese_bracket": lambda dim, s: japanese_bracket(s, dim),
    "axis_shift": lambda dim, axis=1, sign=1: axis_shift(axis, sign, dim),
    "trig_poly": lambda dim, coeffs: trig_poly(coeffs, dim),
    "discrete_laplacian": lambda dim: discrete_laplacian(dim),
    "elliptic_demo": lambda dim, m: elliptic_demo(m, dim),
    "perturbed": lambda dim, m, coeffs, drop=1.0: perturbed(m, coeffs, drop, dim),
}


def builtin(name: str, params: Mapping | None = None, dim: int = 1) -> Symbol:
    if name not in BUILTINS:
        raise ValueError(f"unknown built-in symbol {name!r}; known: {sorted(BUILTINS)}")
    try:
        return BUILTINS[name](dim, **dict(params or {}))
    except TypeError as exc:
        raise ValueError(f"invalid parameters for {name!r}: {exc}") from None


# -- expression symbols ----------------------------------------------------

_EXPR_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp, "sqrt": np.sqrt, "conj": np.conj,
               "abs": np.abs, "log": np.log}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
                  ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


class ExpressionSymbol(Symbol):
    """A symbol written as an arithmetic expression.

    Names available: k1..kn, x1..xn, absk (= |k|), pi, I (imaginary unit),
    L(s) (= Lambda_s(k)) and cos, sin, exp, sqrt, log, abs, conj.
    """

    def __init__(self, expr: str, dim: int, order: float):
        super().__init__(dim, order, name=expr)
        self.expr = expr
        tree = ast.parse(expr, mode="eval")
        allowed = set(_EXPR_FUNCS) | {"pi", "I", "L", "absk"}
        allowed |= {f"k{j + 1}" for j in range(dim)} | {f"x{j + 1}" for j in range(dim)}
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise ValueError(f"unsupported syntax {type(node).__name__} in symbol expression {expr!r}")
            if isinstance(node, ast.Name) and node.id not in allowed:
                raise ValueError(f"unknown name {node.id!r} in symbol expression {expr!r}")
            if isinstance(node, ast.Call) and not isinstance(node.func, ast.Name):
                raise ValueError(f"only plain function calls are allowed in {expr!r}")
        self._code = compile(tree, "<symbol>", "eval")

    def _at(self, k, x):
        kk, xx = k[:, None, :].astype(float), x[None, :, :]
        env = dict(_EXPR_FUNCS, pi=np.pi, I=1j, absk=np.sqrt(np.sum(kk * kk, axis=-1)),
                   L=lambda s: japanese_weight(kk, s))
        for j in range(self.dim):
            env[f"k{j + 1}"] = kk[..., j]
            env[f"x{j + 1}"] = xx[..., j]
        return eval(self._code, {"__builtins__": {}}, env)

    def _describe(self):
        return {"expr": self.expr, "order": self.order, "dim": self.dim}
