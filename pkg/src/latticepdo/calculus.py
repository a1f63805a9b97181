"""Asymptotic composition and adjoint expansions of lattice symbols.

Composition (note the order: torus derivatives on a, lattice differences on b):

    c_N(k, x) = sum_{|alpha| < N} (1/alpha!) D_x^(alpha) a(k, x) Delta_k^alpha b(k, x)

Adjoint:

    q_N(k, x) = sum_{|alpha| < N} (1/alpha!) Delta_k^alpha D_x^(alpha) conj(a(k, x))

D^(alpha) is applied spectrally on a fixed torus grid, Delta^alpha exactly on
the evaluator.  The resulting symbols remember their recipe, so they can be
evaluated at any k without rerunning anything.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .classes import estimate_seminorm
from .fourier import TorusGrid, falling_multiplier
from .lattice import MultiIndex, multi_indices_below, sub_indices
from .quantization import FiniteSectionOperator, finite_section, frequency_shells
from .symbols import CutoffSymbol, SpectralSymbol, SumSymbol, Symbol, as_points

DEFAULT_TERMS = 4
NOISE_FLOOR = 1e-14


def _denoise(coeffs: np.ndarray, dim: int) -> np.ndarray:
    """Zero Fourier coefficients at round-off level relative to each row's peak.

    Falling factorials reach ~M^|alpha| / alpha! at high frequencies and would
    otherwise amplify FFT round-off of smooth symbols into visible errors.
    """
    axes = tuple(range(-dim, 0))
    peak = np.max(np.abs(coeffs), axis=axes, keepdims=True)
    return np.where(np.abs(coeffs) > NOISE_FLOOR * peak, coeffs, 0.0)


def compose_samples(a_vals: np.ndarray, b_shifted: dict, multipliers: dict) -> np.ndarray:
    """sum_alpha D^(alpha) a * Delta^alpha b from samples.

    ``a_vals`` holds a(k, .) on the grid, ``b_shifted`` maps each shift g to
    b(k + g, .), and ``multipliers`` maps alpha to its falling multiplier / alpha!.
    """
    dim = len(next(iter(multipliers)))
    axes = tuple(range(-dim, 0))
    a_hat = _denoise(np.fft.fftn(a_vals, axes=axes), dim)
    out = np.zeros(a_vals.shape, dtype=complex)
    for alpha, mult in multipliers.items():
        da = np.fft.ifftn(a_hat * mult, axes=axes)
        db = sum(c * b_shifted[g] for g, c in sub_indices(alpha))
        out += da * db
    return out


class ExpansionSymbol(SpectralSymbol):
    """Truncated composition or adjoint expansion over a fixed set of multi-indices."""

    def __init__(self, mode: str, operands: tuple, alphas, grid: TorusGrid, order: float, name=""):
        if mode not in ("compose", "adjoint"):
            raise ValueError(f"unknown expansion mode {mode!r}")
        dim = operands[0].dim
        if any(op.dim != dim for op in operands):
            raise ValueError("operands of different dimensions")
        if grid.dim != dim:
            raise ValueError("grid dimension does not match the operands")
        super().__init__(dim, order, grid, name=name or mode)
        self.mode = mode
        self.operands = operands
        self.alphas = [MultiIndex(a) for a in alphas]
        self._multipliers = {a: falling_multiplier(grid.M, a) / a.factorial for a in self.alphas}

    def _shifted(self, sym: Symbol, k: np.ndarray, shifts: set) -> dict:
        return {g: sym.sample(k + np.asarray(g), self.grid) for g in shifts}

    def _sample_own(self, k: np.ndarray) -> np.ndarray:
        k = as_points(k, self.dim)
        axes = self.grid.axes
        shifts = {g for a in self.alphas for g, _ in sub_indices(a)}
        out = np.zeros((len(k),) + self.grid.shape, dtype=complex)
        if self.mode == "compose":
            a, b = self.operands
            return compose_samples(a.sample(k, self.grid), self._shifted(b, k, shifts), self._multipliers)
        else:
            (a,) = self.operands
            abar_hat = {g: _denoise(np.fft.fftn(np.conj(v), axes=axes), self.dim)
                        for g, v in self._shifted(a, k, shifts).items()}
            for alpha in self.alphas:
                diff_hat = sum(c * abar_hat[g] for g, c in sub_indices(alpha))
                out += np.fft.ifftn(diff_hat * self._multipliers[alpha], axes=axes)
        return out

    def _describe(self):
        n_terms = max(a.order for a in self.alphas) + 1
        desc = {"derived": self.mode, "n_terms": n_terms, "M": self.grid.M}
        if self.mode == "compose":
            desc["a"], desc["b"] = (op.describe() for op in self.operands)
        else:
            desc["a"] = self.operands[0].describe()
        return desc


@dataclass
class ExpansionResult:
    symbol: Symbol
    n_terms: int
    remainder_order: float
    terms: list = field(default_factory=list)


def _groups(dim: int, n_terms: int):
    by_order = {}
    for a in multi_indices_below(dim, n_terms):
        by_order.setdefault(a.order, []).append(a)
    return [by_order[j] for j in range(n_terms)]


def compose_symbols(a: Symbol, b: Symbol, n_terms: int = DEFAULT_TERMS, grid: TorusGrid | None = None) -> ExpansionResult:
    """Symbol of T_a T_b truncated to |alpha| < n_terms; remainder order m1 + m2 - n_terms."""
    if n_terms < 1:
        raise ValueError("n_terms must be a positive integer")
    grid = grid or TorusGrid(a.dim, 64)
    m = a.order + b.order
    alphas = multi_indices_below(a.dim, n_terms)
    sym = ExpansionSymbol("compose", (a, b), alphas, grid, m, name=f"compose[{n_terms}]")
    terms = [ExpansionSymbol("compose", (a, b), group, grid, m - j, name=f"compose term {j}")
             for j, group in enumerate(_groups(a.dim, n_terms))]
    return ExpansionResult(sym, n_terms, m - n_terms, terms)


def adjoint_symbol(a: Symbol, n_terms: int = DEFAULT_TERMS, grid: TorusGrid | None = None) -> ExpansionResult:
    """Symbol of (T_a)^dagger truncated to |alpha| < n_terms; remainder order m - n_terms."""
    if n_terms < 1:
        raise ValueError("n_terms must be a positive integer")
    grid = grid or TorusGrid(a.dim, 64)
    alphas = multi_indices_below(a.dim, n_terms)
    sym = ExpansionSymbol("adjoint", (a,), alphas, grid, a.order, name=f"adjoint[{n_terms}]")
    terms = [ExpansionSymbol("adjoint", (a,), group, grid, a.order - j, name=f"adjoint term {j}")
             for j, group in enumerate(_groups(a.dim, n_terms))]
    return ExpansionResult(sym, n_terms, a.order - n_terms, terms)


def asymptotic_sum(symbols, radii=None, grid: TorusGrid | None = None, K: int = 64,
                   max_radius: float = 2.0 ** 12) -> Symbol:
    """sum_j chi(|k| / R_j) a_j for symbols of strictly decreasing order.

    Given ``radii`` are accepted as they are; otherwise R_j is the smallest
    power of two (at least the previous radius, starting from 1) for which the
    excised term's scanned sup at order m_0 is <= 2^-j times that of the first
    term.  The check outcome for every term is stored in ``meta['radius_checks']``.
    """
    symbols = list(symbols)
    if not symbols:
        raise ValueError("need at least one symbol")
    orders = [s.order for s in symbols]
    if any(o2 >= o1 for o1, o2 in zip(orders, orders[1:])):
        raise ValueError(f"orders must be strictly decreasing, got {orders}")
    grid = grid or TorusGrid(symbols[0].dim, 32)
    m0 = orders[0]

    def contribution(sym, R):
        return estimate_seminorm(CutoffSymbol(sym, R), [0] * sym.dim, [0] * sym.dim, K, grid, order=m0).constant

    chosen, checks = [], []
    for j, sym in enumerate(symbols):
        if radii is not None:
            R = float(radii[j])
        elif j == 0:
            R = 1.0
        else:
            R = max(chosen[-1], 1.0)
            while R < max_radius and contribution(sym, R) > 2.0 ** -j * reference:
                R *= 2.0
        if chosen and R < chosen[-1]:
            raise ValueError("excision radii must be non-decreasing")
        value = contribution(sym, R)
        if j == 0:
            reference = value
        checks.append({"term": j, "radius": R, "contribution": value,
                       "bound": reference * 2.0 ** -j, "ok": bool(j == 0 or value <= 2.0 ** -j * reference)})
        chosen.append(R)
    out = SumSymbol([CutoffSymbol(s, R) for s, R in zip(symbols, chosen)])
    out.name = "asymptotic_sum"
    out.meta.update(radii=chosen, radius_checks=checks)
    return out


@dataclass
class RemainderReport:
    claimed_order: float
    shells: list
    fitted_exponent: float
    residual: float
    order_checks: dict

    def rows(self):
        return [(rho, norm, ref) for rho, norm, ref in self.shells]

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["shell_radius", "residual_norm", "reference_power"])
            for rho, norm, ref in self.shells:
                w.writerow([rho, repr(norm), repr(ref)])


def shell_profile(residual: np.ndarray, points: np.ndarray, rows: np.ndarray) -> list:
    """(rho, max l^2 row norm in the shell) for shells containing selected rows."""
    shells = frequency_shells(points)
    norms = np.linalg.norm(residual, axis=1)
    out = []
    for rho in np.unique(shells[rows]):
        sel = rows & (shells == rho)
        out.append((int(rho), float(norms[sel].max())))
    return out


def fit_exponent(profile, fit_from: float, fit_to: float | None = None) -> float:
    pts = [(np.log1p(rho), np.log(v)) for rho, v in profile
           if rho >= fit_from and (fit_to is None or rho <= fit_to) and v > 0]
    if len(pts) < 2:
        return float("nan")
    xs, ys = zip(*pts)
    return float(np.polyfit(xs, ys, 1)[0])


def remainder_order_probe(exact_op: FiniteSectionOperator, expansion: ExpansionResult, grid: TorusGrid,
                          orders=None, margin: int | None = None, fit_from: float | None = None,
                          slack: float = 0.25) -> RemainderReport:
    """Per-shell size of exact_op - Op[expansion] on the interior rows.

    The fitted exponent is the log-log slope of the shell norm against 1 + rho.
    ``orders`` are checked for consistency: fitted exponent <= order + slack.
    """
    box = exact_op.box
    margin = exact_op.margin if margin is None else margin
    approx = finite_section(expansion.symbol, box, grid)
    if approx.matrix.shape != exact_op.matrix.shape:
        raise ValueError("shape mismatch between exact operator and expansion section")
    residual = exact_op.matrix - approx.matrix
    points = box.interior_points()
    rows = np.max(np.abs(points), axis=1) <= box.radius - margin
    profile = shell_profile(residual, points, rows)
    claimed = expansion.remainder_order
    shells = [(rho, v, float((1.0 + rho) ** claimed)) for rho, v in profile]
    top = max(rho for rho, _ in profile)
    fit_from = max(2.0, top / 4) if fit_from is None else fit_from
    exponent = fit_exponent(profile, fit_from)
    residual_scalar = max(v / ref for _, v, ref in shells)
    checks = {float(o): bool(not np.isfinite(exponent) or exponent <= o + slack) for o in (orders or [claimed])}
    return RemainderReport(claimed, shells, exponent, residual_scalar, checks)
