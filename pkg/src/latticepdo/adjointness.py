"""Block operator T = [[0, Q], [P, 0]] on H^{s1} + H^{s2} and its probes.

P is the section of T_a as a map H^{s1} -> H^{s2}.  Q maps back and is built
either as the exact weighted adjoint of P, or from the adjoint-symbol
expansion conjugated by the diagonal weights,

    Q = Lambda_{-2 s1} Op[q_N] Lambda_{2 s2}.

All norms use the direct-sum weight W = diag(Lambda_{s1}^2, Lambda_{s2}^2).
Because W is diagonal, weighted quantities are computed from the similarity
B = W^{1/2} T W^{-1/2}: the weighted adjoint of T corresponds to B^H.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .calculus import DEFAULT_TERMS, adjoint_symbol, compose_symbols
from .classes import DEFAULT_C_MIN, EllipticityCertificate, check_ellipticity
from .fourier import TorusGrid
from .lattice import LatticeBox, LatticeFunction, margin_mask
from .quantization import FiniteSectionOperator, SobolevSpec, finite_section, sobolev_norm, weighted_adjoint
from .symbols import Symbol, japanese_bracket, japanese_weight

MODES = ("exact", "expansion")


@dataclass
class BlockOperator:
    P: FiniteSectionOperator
    Q: FiniteSectionOperator
    s1: float
    s2: float
    mode: str
    recipe: dict = field(default_factory=dict)

    @property
    def box(self) -> LatticeBox:
        return self.P.box

    @property
    def size(self) -> int:
        return 2 * self.P.matrix.shape[0]

    def matrix(self) -> np.ndarray:
        n = self.P.matrix.shape[0]
        T = np.zeros((2 * n, 2 * n), dtype=complex)
        T[:n, n:] = self.Q.matrix
        T[n:, :n] = self.P.matrix
        return T

    def weights(self) -> np.ndarray:
        """Diagonal of W: Lambda_{s1}^2 on the first block, Lambda_{s2}^2 on the second."""
        pts = self.box.interior_points()
        return np.concatenate([japanese_weight(pts, self.s1) ** 2, japanese_weight(pts, self.s2) ** 2])

    def similar(self) -> np.ndarray:
        """W^{1/2} T W^{-1/2}."""
        r = np.sqrt(self.weights())
        return r[:, None] * self.matrix() / r[None, :]

    def weighted_adjoint_matrix(self) -> np.ndarray:
        """T* = W^{-1} T^H W."""
        w = self.weights()
        return self.matrix().conj().T * w[None, :] / w[:, None]

    def interior_mask(self, margin: int) -> np.ndarray:
        m = margin_mask(self.box, margin)
        return np.concatenate([m, m])


def _q_from_expansion(a: Symbol, s1: float, s2: float, box: LatticeBox, grid: TorusGrid,
                      n_terms: int) -> FiniteSectionOperator:
    q = adjoint_symbol(a, n_terms, grid).symbol
    sec = finite_section(q, box, grid).matrix
    pts = box.interior_points()
    mat = japanese_weight(pts, -2 * s1)[:, None] * sec * japanese_weight(pts, 2 * s2)[None, :]
    return FiniteSectionOperator(box, mat, SobolevSpec(s2), SobolevSpec(s1))


def build_block(a: Symbol, s1: float, s2: float, box: LatticeBox, grid: TorusGrid | None = None,
                mode: str = "exact", n_terms: int = DEFAULT_TERMS) -> BlockOperator:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "expansion" and n_terms < 1:
        raise ValueError("expansion mode needs n_terms >= 1")
    grid = grid or TorusGrid.for_box(box, minimum=64 if box.dim == 1 else 0)
    P = finite_section(a, box, grid, s1, s2)
    if mode == "exact":
        Q = weighted_adjoint(P)
    else:
        Q = _q_from_expansion(a, s1, s2, box, grid, n_terms)
    recipe = {"symbol": a, "grid_M": grid.M, "n_terms": n_terms if mode == "expansion" else None}
    return BlockOperator(P, Q, float(s1), float(s2), mode, recipe)


def symmetry_defect(T: BlockOperator, interior: bool = True, margin: int | None = None,
                    low_cut: float | None = None) -> float:
    """Weighted operator norm of T - T*, compressed to interior-supported vectors when ``interior``.

    ``low_cut`` additionally drops lattice points with |k| < low_cut.  NaN means
    the compression left no points.
    """
    B = T.similar()
    D = B - B.conj().T
    if interior:
        if margin is None:
            margin = 2 + (T.recipe.get("n_terms") or 0)
        sel = T.interior_mask(margin)
        if low_cut is not None:
            pts = T.box.interior_points()
            norm = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
            sel = sel & np.concatenate([norm >= low_cut, norm >= low_cut])
        if not sel.any():
            return float("nan")
        D = D[np.ix_(sel, sel)]
    return float(np.linalg.norm(D, 2))


def sigma_min_shifted(T: BlockOperator, sign: int) -> float:
    """Smallest singular value of T + sign * i I in the weighted inner product."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    B = T.similar()
    return float(np.linalg.svd(B + sign * 1j * np.eye(B.shape[0]), compute_uv=False).min())


@dataclass
class DeficiencyReport:
    sign: int
    mode: str
    s1: float
    s2: float
    rows: list  # (N, sigma_min, interior symmetry defect)

    @property
    def min_sigma(self) -> float:
        return min(r[1] for r in self.rows)

    def to_dict(self):
        return {"sign": self.sign, "mode": self.mode, "s1": self.s1, "s2": self.s2,
                "rows": [{"N": N, "sigma_min": sig, "defect": d} for N, sig, d in self.rows]}

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "sigma_min", "defect"])
            for N, sig, d in self.rows:
                w.writerow([N, repr(sig), repr(d)])


def deficiency_probe(T: BlockOperator, sign: int = 1, radii=(8, 16, 32)) -> DeficiencyReport:
    """Rebuild T on each box radius from its recipe and record sigma_min(T +- iI)."""
    radii = [int(N) for N in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    a = T.recipe["symbol"]
    rows = []
    for N in radii:
        box = LatticeBox(a.dim, N)
        grid = TorusGrid.for_box(box, minimum=T.recipe["grid_M"])
        block = build_block(a, T.s1, T.s2, box, grid, T.mode, T.recipe.get("n_terms") or DEFAULT_TERMS)
        rows.append((N, sigma_min_shifted(block, sign), symmetry_defect(block)))
    return DeficiencyReport(sign, T.mode, T.s1, T.s2, rows)


# -- Sobolev duality ---------------------------------------------------------

@dataclass
class DualityReport:
    s: float
    trials: int
    seed: int
    norm: float
    max_violation: float
    attained: float
    attain_error: float
    maximizer_norm: float

    def passed(self, cs_tol: float = 1e-12, attain_tol: float = 1e-10) -> bool:
        return bool(self.max_violation <= cs_tol and self.attain_error <= attain_tol)

    def to_dict(self):
        return dict(self.__dict__)


def _pairing(u: np.ndarray, v: np.ndarray) -> complex:
    return complex(np.sum(u * np.conj(v)))


def duality_check(u: LatticeFunction, s: float, trials: int = 1000, seed: int = 0) -> DualityReport:
    """Cauchy-Schwarz |(u, v)| <= ||u||_{H^s} ||v||_{H^-s} on random v, and the explicit maximizer.

    Violations are relative: (|(u, v)| - ||u|| ||v||) / (||u|| ||v||).  Half the
    trial vectors are perturbations of the maximizer, so near-equality is probed.
    """
    norm = sobolev_norm(u, s)
    if norm == 0.0:
        return DualityReport(float(s), int(trials), int(seed), 0.0, 0.0, 0.0, 0.0, 0.0)
    vals = u.flat()
    pts = u.box.points()
    w = japanese_weight(pts, 2 * s)
    v_star = w * vals / norm
    rng = np.random.default_rng(seed)
    worst = -np.inf
    dual = japanese_weight(pts, -s)
    for j in range(trials):
        v = rng.standard_normal(vals.shape) + 1j * rng.standard_normal(vals.shape)
        if j % 2:
            v = v_star + 10.0 ** rng.uniform(-12, 0) * v / np.linalg.norm(v) * np.linalg.norm(v_star)
        bound = norm * float(np.linalg.norm(dual * v))
        worst = max(worst, (abs(_pairing(vals, v)) - bound) / bound)
    attained = abs(_pairing(vals, v_star))
    v_norm = float(np.linalg.norm(dual * v_star))
    return DualityReport(float(s), int(trials), int(seed), norm, float(max(worst, 0.0)), attained,
                         abs(attained - norm) / norm, v_norm)


# -- ellipticity of PQ + I ----------------------------------------------------

@dataclass
class PQCertificate:
    certificate: EllipticityCertificate
    hypothesis_met: bool
    note: str
    order: float

    def to_dict(self):
        return {"certificate": self.certificate.to_dict(), "hypothesis_met": self.hypothesis_met,
                "note": self.note, "order": self.order}


def pq_plus_identity_symbol(a: Symbol, s1: float, s2: float, n_terms: int = DEFAULT_TERMS,
                            grid: TorusGrid | None = None) -> Symbol:
    """Symbol of P Q + I with Q = T_{Lambda_{-2s1}} (T_a)^dagger T_{Lambda_{2s2}}, via the expansions."""
    grid = grid or TorusGrid(a.dim, 64)
    q = adjoint_symbol(a, n_terms, grid).symbol
    right = compose_symbols(q, japanese_bracket(2 * s2, a.dim), n_terms, grid).symbol
    Q = japanese_bracket(-2 * s1, a.dim) * right
    return compose_symbols(a, Q, n_terms, grid).symbol + 1.0


def ellipticity_of_PQplusI(a: Symbol, s1: float, s2: float, m: float | None = None, R: float = 0.0,
                          K: int = 32, grid: TorusGrid | None = None, n_terms: int = DEFAULT_TERMS,
                          c_min: float = DEFAULT_C_MIN) -> PQCertificate:
    """Certificate for PQ + I at order 2m + 2s2 - 2s1; the scan runs even if m <= s1 - s2."""
    m = a.order if m is None else float(m)
    order = 2 * m + 2 * s2 - 2 * s1
    met = m + s2 - s1 > 0
    sym = pq_plus_identity_symbol(a, s1, s2, n_terms, grid)
    cert = check_ellipticity(sym, R, K, grid or TorusGrid(a.dim, 64), c_min, order=order)
    note = "" if met else "hypothesis m > s1 - s2 not met; exploratory scan only"
    return PQCertificate(cert, met, note, order)


# -- Riesz-weight consistency -------------------------------------------------

@dataclass
class RieszReport:
    exact_difference: float
    expansion_difference: float | None
    expansion_budget: float | None

    def passed(self, exact_tol: float = 1e-12, rounding: float = 1e-9) -> bool:
        """Exact mode to ``exact_tol``; expansion mode within its budget.

        The budget bound can be attained, so ``rounding`` absorbs relative
        floating-point error and ``exact_tol`` serves as an absolute floor for
        expansions that terminate (zero budget).
        """
        ok = self.exact_difference <= exact_tol
        if self.expansion_difference is not None:
            ok = ok and self.expansion_difference <= self.expansion_budget * (1 + rounding) + exact_tol
        return bool(ok)

    def to_dict(self):
        return dict(self.__dict__)


def riesz_consistency(a: Symbol, s1: float, s2: float, box: LatticeBox, grid: TorusGrid,
                      n_terms: int | None = None, low_cut: float | None = None) -> RieszReport:
    """Compare weighted_adjoint(P) with the product of sections E_1 P^H E_2^{-1}.

    E_j are sections of the multipliers Lambda_{-2 s_j}, assembled from the symbol
    japanese_bracket through finite_section.  With ``n_terms`` the expansion-mode Q
    is also compared on the interior band |k| >= low_cut (default box radius / 2);
    the budget bounds every entry by the unweighted adjoint residual there times
    the largest weight ratio Lambda_{2 s2}(l) / Lambda_{2 s1}(k) in the band.
    """
    P = finite_section(a, box, grid, s1, s2)
    exact = weighted_adjoint(P).matrix
    E1 = finite_section(japanese_bracket(-2 * s1, a.dim), box, grid).matrix
    E2inv = finite_section(japanese_bracket(2 * s2, a.dim), box, grid).matrix
    riesz = E1 @ P.matrix.conj().T @ E2inv
    diff = float(np.max(np.abs(riesz - exact)))
    if n_terms is None:
        return RieszReport(diff, None, None)
    Qexp = _q_from_expansion(a, s1, s2, box, grid, n_terms).matrix
    pts = box.interior_points()
    cut = box.radius / 2 if low_cut is None else low_cut
    band = margin_mask(box, 2 + n_terms) & (np.sqrt(np.sum(pts.astype(float) ** 2, axis=1)) >= cut)
    ix = np.ix_(band, band)
    raw = finite_section(adjoint_symbol(a, n_terms, grid).symbol, box, grid).matrix - P.matrix.conj().T
    ratio = japanese_weight(pts[band], 2 * s2).max() / japanese_weight(pts[band], 2 * s1).min()
    budget = float(np.linalg.norm(raw[ix], 2) * ratio)
    return RieszReport(diff, float(np.max(np.abs(Qexp[ix] - exact[ix]))), budget)
