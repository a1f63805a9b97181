"""Finite certificates for symbol-class membership and ellipticity.

Membership in S^m quantifies over all of Z^n, so the scans below only
estimate constants on a ball |k| <= K and add a growth diagnostic: the
log-log slope, over the outer shells, of the per-shell peak divided by
|k|^(m - |alpha|).  A genuine member has slope <= 0 up to a small slack.
Fitting against |k| rather than 1 + |k| avoids a spurious positive slope for
symbols such as Lambda_m whose ratio to (1 + |k|)^m increases towards its limit.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .fourier import TorusGrid, apply_falling_derivative
from .lattice import MultiIndex
from .symbols import DifferencedSymbol, Symbol

DEFAULT_SLACK = 0.05
DEFAULT_C_MIN = 1e-8


def ball_points(dim: int, radius: float, inner: float = -1.0) -> np.ndarray:
    """Lattice points with inner < |k| <= radius, lexicographic."""
    r = int(np.floor(radius))
    axis = np.arange(-r, r + 1)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    norm = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
    return pts[(norm <= radius) & (norm > inner)]


def growth_slope(radii: np.ndarray, peaks: np.ndarray, order: float, fit_from: float) -> float:
    """Least-squares slope of log(peak / rho^order) against log(rho), one point per shell."""
    shells = np.rint(radii).astype(int)
    xs, ys = [], []
    for rho in np.unique(shells):
        if rho < max(fit_from, 1):
            continue
        r = peaks[shells == rho].max()
        if r > 0:
            xs.append(np.log(rho))
            ys.append(np.log(r) - order * np.log(rho))
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])


@dataclass
class SeminormReport:
    alpha: tuple
    beta: tuple
    scan_radius: int
    order: float
    constant: float
    growth: float
    slack: float
    accepted: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class EllipticityCertificate:
    exclusion_radius: float
    scan_radius: int
    order: float
    constant: float
    c_min: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def estimate_seminorm(a: Symbol, alpha, beta, K: int, grid: TorusGrid, order: float | None = None,
                      slack: float = DEFAULT_SLACK) -> SeminormReport:
    """Scan max |D^(beta) Delta^alpha a(k, x)| / (1 + |k|)^(m - |alpha|) over |k| <= K.

    Differences in k are exact on the evaluator; D^(beta) is spectral on ``grid``.
    """
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    m = a.order if order is None else float(order)
    pts = ball_points(a.dim, K)
    raw = DifferencedSymbol(a, alpha).sample(pts, grid)
    vals = apply_falling_derivative(raw, beta)
    peak = np.abs(vals).reshape(len(pts), -1).max(axis=1)
    radii = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
    ratios = peak / (1.0 + radii) ** (m - alpha.order)
    # FFT round-off amplified by the falling factorials is not signal
    noise = 1e-13 * max(1.0, (grid.M / 2) ** beta.order) * np.abs(raw).reshape(len(pts), -1).max(axis=1)
    ratios[peak <= noise] = 0.0
    constant = float(ratios.max())
    peak = np.where(ratios > 0, peak, 0.0)
    slope = growth_slope(radii, peak, m - alpha.order, fit_from=max(1.0, K / 4))
    accepted = constant == 0.0 or not np.isfinite(slope) or slope <= slack
    return SeminormReport(tuple(alpha), tuple(beta), int(K), m, constant, slope, slack, bool(accepted))


def check_ellipticity(a: Symbol, R: float = 0.0, K: int = 32, grid: TorusGrid | None = None,
                      c_min: float = DEFAULT_C_MIN, order: float | None = None) -> EllipticityCertificate:
    """Estimate C = min |a(k, x)| / (1 + |k|)^m over R < |k| <= K and grid points x."""
    if not K > R >= 0:
        raise ValueError(f"need K > R >= 0, got K={K}, R={R}")
    grid = grid or TorusGrid(a.dim, 64)
    m = a.order if order is None else float(order)
    pts = ball_points(a.dim, K, inner=R)
    vals = np.abs(a.sample(pts, grid)).reshape(len(pts), -1).min(axis=1)
    radii = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
    constant = float(np.min(vals / (1.0 + radii) ** m))
    return EllipticityCertificate(float(R), int(K), m, constant, float(c_min), bool(constant >= c_min))
