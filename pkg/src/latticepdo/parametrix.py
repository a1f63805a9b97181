"""Parametrix of an elliptic symbol and elliptic-regularity box scans.

The construction starts from the excised, regularized reciprocal

    q_0(k, x) = chi(|k| / R) conj(p) / (|p|^2 + eps)

and applies Neumann-type corrections

    q_{j+1} = q_j - q_0 (c_j - 1),   c_j = compose(q_j, p) truncated to j + 2 terms,

so the leading error order drops by one per step.  Residuals Op[q]Op[p] - I and
Op[p]Op[q] - I are measured as maps H^s -> H^{s+t} on the high-frequency
interior subspace |k| > 2R, where the excision no longer acts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import compose_samples
from .classes import DEFAULT_C_MIN, EllipticityCertificate, ball_points, check_ellipticity
from .fourier import TorusGrid, falling_multiplier
from .lattice import LatticeBox, LatticeFunction, multi_indices_below, sub_indices
from .quantization import FiniteSectionOperator, finite_section, sobolev_norm
from .symbols import ExcisedInverseSymbol, SpectralSymbol, Symbol, as_points, japanese_weight

DEFAULT_T_VALUES = (0, 1, 2, 3)


class NotEllipticError(ValueError):
    """The symbol failed its ellipticity certificate, so no parametrix is built."""


class CorrectionSymbol(SpectralSymbol):
    """q_prev - q0 * (compose(q_prev, p; n_terms) - 1), sampling q_prev once per call."""

    def __init__(self, prev: Symbol, q0: Symbol, p: Symbol, n_terms: int, grid: TorusGrid, step: int):
        super().__init__(p.dim, -p.order, grid, name=f"parametrix step {step}")
        self.prev, self.q0, self.p = prev, q0, p
        self.n_terms = int(n_terms)
        self.step = step
        self._multipliers = {a: falling_multiplier(grid.M, a) / a.factorial
                             for a in multi_indices_below(p.dim, n_terms)}
        self._shifts = {g for a in self._multipliers for g, _ in sub_indices(a)}

    def _sample_own(self, k):
        k = as_points(k, self.dim)
        q = self.prev.sample(k, self.grid)
        p_at = {g: self.p.sample(k + np.asarray(g), self.grid) for g in self._shifts}
        c = compose_samples(q, p_at, self._multipliers)
        return q - self.q0.sample(k, self.grid) * (c - 1.0)

    def _describe(self):
        return {"derived": "parametrix_step", "step": self.step, "n_terms": self.n_terms, "M": self.grid.M,
                "q0": self.q0.describe(), "p": self.p.describe(), "prev": self.prev.describe()}


@dataclass
class ResidualReport:
    """Norms of a residual V as a map H^s -> H^{s+t}, overall and per frequency shell."""

    label: str
    s: float
    cut: float
    norms: dict
    shells: list = field(default_factory=list)

    def rows(self):
        return list(self.shells)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "shell", "norm"])
            for t, rho, v in self.shells:
                w.writerow([t, rho, repr(v)])

    def to_dict(self):
        return {"label": self.label, "s": self.s, "cut": self.cut,
                "norms": {str(t): v for t, v in self.norms.items()}}


@dataclass
class ParametrixResult:
    q: Symbol
    J: int
    R: float
    eps: float
    certificate: EllipticityCertificate
    left: ResidualReport | None = None
    right: ResidualReport | None = None
    history: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def to_dict(self):
        return {"J": self.J, "R": self.R, "eps": self.eps, "certificate": self.certificate.to_dict(),
                "left": self.left.to_dict() if self.left else None,
                "right": self.right.to_dict() if self.right else None,
                "history": self.history}


def high_frequency_rows(box: LatticeBox, cut: float, margin: int) -> np.ndarray:
    """Interior points with |k| > cut and at least ``margin`` layers from the box edge."""
    pts = box.interior_points()
    norm = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
    return (norm > cut) & (np.max(np.abs(pts), axis=1) <= box.radius - margin)


def residual_report(V: np.ndarray, box: LatticeBox, s: float, t_values, cut: float, margin: int,
                    label: str = "") -> ResidualReport:
    """H^s -> H^{s+t} norms of V compressed to the high-frequency interior subspace."""
    sel = high_frequency_rows(box, cut, margin)
    pts = box.interior_points()[sel]
    block = V[np.ix_(sel, sel)]
    radii = np.rint(np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))).astype(int)
    norms, shells = {}, []
    for t in t_values:
        W = japanese_weight(pts, s + t)[:, None] * block / japanese_weight(pts, s)[None, :]
        norms[t] = float(np.linalg.norm(W, 2)) if W.size else 0.0
        row_norms = np.linalg.norm(W, axis=1)
        for rho in np.unique(radii):
            shells.append((t, int(rho), float(row_norms[radii == rho].max())))
    return ResidualReport(label, float(s), float(cut), norms, shells)


def _regularizer(p: Symbol, R: float, K: int, grid: TorusGrid) -> float:
    """Fallback eps: 1e-12 times the largest |p|^2 if p vanishes where the cutoff is live."""
    pts = ball_points(p.dim, K, inner=R)
    vals = np.abs(p.sample(pts, grid)) ** 2
    return 0.0 if vals.min() > 0 else 1e-12 * float(vals.max())


def build_parametrix(p: Symbol, J: int = 3, R: float = 4.0, eps: float = 0.0, grid: TorusGrid | None = None,
                     box: LatticeBox | None = None, s: float = 0.0, t_values=DEFAULT_T_VALUES, K: int = 32,
                     c_min: float = DEFAULT_C_MIN, margin: int = 2) -> ParametrixResult:
    """Parametrix q of order -m after J correction steps, with residual reports.

    Raises NotEllipticError when check_ellipticity(p, R) fails.  With ``box``
    given, both residuals are measured for every j <= J and stored in
    ``history``; the final ones are ``left`` (QP - I) and ``right`` (PQ - I).
    """
    if J < 0:
        raise ValueError("J must be non-negative")
    grid = grid or TorusGrid(p.dim, 64)
    cert = check_ellipticity(p, R, max(K, int(2 * R) + 1), grid, c_min)
    if not cert.passed:
        raise NotEllipticError(f"ellipticity certificate failed beyond R={R}: C={cert.constant:.3g} < {c_min:g}")
    if eps == 0.0:
        eps = _regularizer(p, R, max(K, int(2 * R) + 1), grid)
    q0 = ExcisedInverseSymbol(p, R, eps)
    steps = [q0]
    for j in range(J):
        steps.append(CorrectionSymbol(steps[-1], q0, p, j + 2, grid, j + 1))
    result = ParametrixResult(steps[-1], J, float(R), float(eps), cert, steps=steps)
    if box is None:
        return result
    P = finite_section(p, box, grid).matrix
    eye = np.eye(P.shape[0])
    for j, q in enumerate(steps):
        Q = finite_section(q, box, grid).matrix
        left = residual_report(Q @ P - eye, box, s, t_values, 2 * R, margin, "QP - I")
        right = residual_report(P @ Q - eye, box, s, t_values, 2 * R, margin, "PQ - I")
        result.history.append({"J": j, "left": left.norms, "right": right.norms})
        result.left, result.right = left, right
    return result


# -- elliptic regularity ---------------------------------------------------

@dataclass
class RegularityReport:
    s: float
    m: float
    radii: list
    norms: list
    contrast: list
    singular: list
    plateau_change: float
    contrast_change: float
    tolerance: float

    @property
    def plateaued(self) -> bool:
        return bool(not any(self.singular) and self.plateau_change <= self.tolerance)

    def to_dict(self):
        return {"s": self.s, "m": self.m, "radii": self.radii, "norm_s_plus_m": self.norms,
                "norm_s_plus_m_plus_1": self.contrast, "singular": self.singular,
                "plateau_change": self.plateau_change, "contrast_change": self.contrast_change,
                "tolerance": self.tolerance, "plateaued": self.plateaued}

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "norm_s_plus_m", "norm_s_plus_m_plus_1", "singular"])
            for row in zip(self.radii, self.norms, self.contrast, self.singular):
                w.writerow([row[0], repr(row[1]), repr(row[2]), int(row[3])])


def _rhs(f, box: LatticeBox) -> np.ndarray:
    pts = box.interior_points()
    if callable(f):
        return np.asarray(f(pts), dtype=complex).reshape(len(pts))
    if isinstance(f, LatticeFunction):
        out = np.zeros(len(pts), dtype=complex)
        e = f.box.extent
        inside = np.all(np.abs(pts) <= e, axis=1)
        idx = np.ravel_multi_index(tuple((pts[inside] + e).T), f.box.shape)
        out[inside] = f.values.ravel()[idx]
        return out
    raise TypeError("f must be a callable on lattice points or a LatticeFunction")


def elliptic_regularity_experiment(a: Symbol, f: Callable | LatticeFunction, s: float = 0.0,
                                   radii=(8, 16, 32), m: float | None = None, grid_points: int | None = None,
                                   tolerance: float = 0.02, cond_limit: float = 1e13) -> RegularityReport:
    """Solve finite sections A u = f on growing boxes and track ||u||_{H^{s+m}}.

    A section whose condition number exceeds ``cond_limit`` is flagged as
    singular (its norms are NaN) rather than raising.
    """
    radii = [int(N) for N in radii]
    if any(b <= a_ for a_, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    m = a.order if m is None else float(m)
    norms, contrast, singular = [], [], []
    for N in radii:
        box = LatticeBox(a.dim, N)
        grid = TorusGrid.for_box(box, minimum=grid_points or 0)
        A = finite_section(a, box, grid).matrix
        rhs = _rhs(f, box)
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > cond_limit:
            singular.append(True)
            norms.append(float("nan"))
            contrast.append(float("nan"))
            continue
        u = LatticeFunction.from_interior(box, np.linalg.solve(A, rhs))
        singular.append(False)
        norms.append(sobolev_norm(u, s + m))
        contrast.append(sobolev_norm(u, s + m + 1))

    def change(vals):
        if len(vals) < 2 or not np.all(np.isfinite(vals[-2:])) or vals[-2] == 0:
            return float("nan")
        return float(abs(vals[-1] - vals[-2]) / abs(vals[-2]))

    return RegularityReport(float(s), m, radii, norms, contrast, singular, change(norms), change(contrast),
                            float(tolerance))
