"""Regression corpus of symbols, lattice functions and block cases, with the acceptance checks.

Each ``check_*`` function runs one property over the corpus and returns a
Verdict carrying the measured value next to the tolerance it was judged by.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adjointness import (build_block, deficiency_probe, duality_check, ellipticity_of_PQplusI,
                          riesz_consistency, sigma_min_shifted, symmetry_defect)
from .calculus import adjoint_symbol, compose_symbols, remainder_order_probe
from .fourier import TorusGrid, dft
from .lattice import LatticeBox, LatticeFunction, margin_mask
from .parametrix import build_parametrix, elliptic_regularity_experiment
from .quantization import finite_section, operator_norm_estimate
from .symbols import axis_shift, constant, elliptic_demo, japanese_bracket, perturbed, trig_poly


@dataclass
class Verdict:
    key: str
    title: str
    passed: bool
    value: float
    tolerance: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key} {self.title}: value={self.value:.3e} ({self.tolerance})"

    def to_dict(self):
        return {"key": self.key, "title": self.title, "passed": self.passed, "value": self.value,
                "tolerance": self.tolerance, "details": self.details}


# -- corpus -----------------------------------------------------------------

def cosine(dim: int = 1):
    return trig_poly({1: 0.5, -1: 0.5}, dim)


def deficiency_demo():
    """elliptic_demo(1) (1 + 0.3 e^{2 pi i x_1}), declared of order 1."""
    return (elliptic_demo(1) * (1 + 0.3 * axis_shift())).with_order(1)


def adjoint_corpus() -> dict:
    """x-dependent symbols whose adjoint expansion does not terminate."""
    return {
        "bracket1_shift": japanese_bracket(1) * axis_shift(),
        "elliptic_demo1": elliptic_demo(1),
        "elliptic_demo_half": elliptic_demo(0.5),
        "deficiency_demo": deficiency_demo(),
        "bracket_half_cosine": japanese_bracket(0.5) * cosine(),
    }


def exact_adjoint_corpus() -> dict:
    """The shifts and real x-independent symbols: their adjoint expansions are exact."""
    out = {"shift+": axis_shift(1, 1), "shift-": axis_shift(1, -1), "constant3": constant(3.0)}
    for s in (-1.0, 0.0, 1.0, 2.5):
        out[f"bracket{s:g}"] = japanese_bracket(s)
    return out


def compose_pairs() -> dict:
    return {
        "elliptic_demo1 o bracket0.5": (elliptic_demo(1), japanese_bracket(0.5)),
        "cosine o bracket1.5": (cosine(), japanese_bracket(1.5)),
        "elliptic_demo0.5 o perturbed0.5": (elliptic_demo(0.5), perturbed(0.5, {-1: 0.2, 1: 0.1})),
    }


def boundedness_cases() -> list:
    """(name, symbol, s) with H^s -> H^{s-m} sections."""
    return [
        ("bracket1", japanese_bracket(1), 0.0),
        ("bracket1", japanese_bracket(1), 1.0),
        ("bracket-1", japanese_bracket(-1), 0.0),
        ("elliptic_demo1", elliptic_demo(1), 0.0),
        ("elliptic_demo1", elliptic_demo(1), 0.5),
        ("elliptic_demo0.5", elliptic_demo(0.5), 1.0),
        ("shift", axis_shift(), 0.0),
        ("perturbed1", perturbed(1, {-1: 0.2, 1: 0.1}), -1.0),
        ("deficiency_demo", deficiency_demo(), 0.5),
    ]


def lattice_corpus(box: LatticeBox | None = None, seed: int = 7) -> dict:
    box = box or LatticeBox(1, 32)
    rng = np.random.default_rng(seed)
    e1 = np.zeros(box.dim, dtype=int)
    e1[0] = 1

    def norm(p):
        return np.sqrt(np.sum(p.astype(float) ** 2, axis=1))

    return {
        "delta0": LatticeFunction.delta(box),
        "delta_e1": LatticeFunction.delta(box, e1),
        "geometric": LatticeFunction.from_function(box, lambda p: 2.0 ** -norm(p)),
        "slow_tail": LatticeFunction.from_function(box, lambda p: (1 + norm(p)) ** -1.25),
        "random": LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)),
    }


def block_cases() -> dict:
    """(symbol, s1, s2, m) with m > s1 - s2, all elliptic."""
    return {
        "elliptic_demo1 (0.5,0)": (elliptic_demo(1), 0.5, 0.0, 1.0),
        "deficiency_demo (0.5,0)": (deficiency_demo(), 0.5, 0.0, 1.0),
        "elliptic_demo1 (1,0.5)": (elliptic_demo(1), 1.0, 0.5, 1.0),
        "bracket2 (1,0)": (japanese_bracket(2), 1.0, 0.0, 2.0),
        "elliptic_demo0.5 (0.25,0)": (elliptic_demo(0.5), 0.25, 0.0, 0.5),
    }


def hermitian_cases() -> dict:
    return {
        "bracket1": japanese_bracket(1),
        "bracket2": japanese_bracket(2),
        "i*bracket1": 1j * japanese_bracket(1),
        "i*bracket2": 1j * japanese_bracket(2),
    }


# -- shared measurements ----------------------------------------------------

def band_mask(box: LatticeBox, margin: int, low_cut: float) -> np.ndarray:
    pts = box.interior_points()
    return margin_mask(box, margin) & (np.sqrt(np.sum(pts.astype(float) ** 2, axis=1)) >= low_cut)


def adjoint_residuals(a, box: LatticeBox, grid: TorusGrid, n_terms_list, low_cut: float | None = None) -> list:
    """Interior operator norm of Op[q_N] - Op[a]^H on the band |k| >= low_cut, one per N_terms.

    The band is interior (margin 2 + N_terms) and, by default, the upper half
    |k| >= radius / 2 of the box, where the expansion is asymptotic.
    """
    low_cut = box.radius / 2 if low_cut is None else low_cut
    H = finite_section(a, box, grid).matrix.conj().T
    out = []
    for n in n_terms_list:
        Q = finite_section(adjoint_symbol(a, n, grid).symbol, box, grid).matrix
        sel = band_mask(box, 2 + n, low_cut)
        out.append(float(np.linalg.norm((Q - H)[np.ix_(sel, sel)], 2)))
    return out


def compose_residuals(a, b, box: LatticeBox, grid: TorusGrid, n_terms_list, low_cut: float | None = None) -> list:
    low_cut = box.radius / 2 if low_cut is None else low_cut
    exact = finite_section(a, box, grid).matrix @ finite_section(b, box, grid).matrix
    out = []
    for n in n_terms_list:
        C = finite_section(compose_symbols(a, b, n, grid).symbol, box, grid).matrix
        sel = band_mask(box, 2 + n, low_cut)
        out.append(float(np.linalg.norm((C - exact)[np.ix_(sel, sel)], 2)))
    return out


def monotone_within(values, rel: float = 0.10) -> bool:
    return all(b <= (1 + rel) * a for a, b in zip(values, values[1:]))


# -- criteria ---------------------------------------------------------------

def check_plancherel(count: int = 100, seed: int = 0) -> Verdict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j in range(count):
        dim = 1 + j % 2
        box = LatticeBox(dim, 32 if dim == 1 else 8)
        grid = TorusGrid.for_box(box)
        u = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
        lhs = float(np.sum(np.abs(u.values) ** 2))
        rhs = float(np.mean(np.abs(dft(u, grid).values) ** 2))
        worst = max(worst, abs(lhs - rhs) / lhs)
    return Verdict("C1", "Plancherel", worst < 1e-12, worst, "relative error < 1e-12",
                   {"functions": count, "seed": seed})


def check_quantization_exactness() -> Verdict:
    worst_off, worst_shift = 0.0, 0.0
    rng = np.random.default_rng(1)
    for dim, N in ((1, 32), (2, 8)):
        box = LatticeBox(dim, N)
        grid = TorusGrid.for_box(box)
        for sym in (japanese_bracket(-2, dim), japanese_bracket(0.5, dim), japanese_bracket(2, dim),
                    constant(1.5 - 0.5j, dim)):
            A = finite_section(sym, box, grid).matrix
            worst_off = max(worst_off, float(np.max(np.abs(A - np.diag(np.diag(A))))))
        pts = box.interior_points()
        u = rng.standard_normal(len(pts)) + 1j * rng.standard_normal(len(pts))
        lookup = {tuple(p): i for i, p in enumerate(pts)}
        inner = margin_mask(box, 1)
        for axis in range(1, dim + 1):
            for sign in (1, -1):
                A = finite_section(axis_shift(axis, sign, dim), box, grid).matrix
                shift = np.zeros(dim, dtype=int)
                shift[axis - 1] = sign
                oracle = np.array([u[lookup[tuple(p + shift)]] for p in pts[inner]])
                worst_shift = max(worst_shift, float(np.max(np.abs((A @ u)[inner] - oracle))))
    value = max(worst_off, worst_shift)
    return Verdict("C2", "quantization exactness", value < 1e-12, value,
                   "off-diagonals and shift error < 1e-12",
                   {"max_off_diagonal": worst_off, "max_shift_error": worst_shift})


def check_formal_adjoint(n_terms_list=(1, 2, 3, 4, 5, 6)) -> Verdict:
    box, grid = LatticeBox(1, 32), TorusGrid(1, 128)
    series, mono = {}, True
    for name, a in adjoint_corpus().items():
        res = adjoint_residuals(a, box, grid, n_terms_list)
        series[name] = res
        mono = mono and monotone_within(res)
    exact_worst = 0.0
    for name, a in exact_adjoint_corpus().items():
        H = finite_section(a, box, grid).matrix.conj().T
        for n in (1, 2, 4):
            Q = finite_section(adjoint_symbol(a, n, grid).symbol, box, grid).matrix
            sel = margin_mask(box, 2 + n)
            exact_worst = max(exact_worst, float(np.max(np.abs((Q - H)[np.ix_(sel, sel)]))))
    passed = mono and exact_worst < 1e-12
    return Verdict("C3", "formal adjoint", passed, exact_worst,
                   "exact cases < 1e-12; corpus residual monotone within 10% in N_terms",
                   {"residuals": series, "n_terms": list(n_terms_list), "monotone": mono})


def check_composition_order(n_terms_list=(1, 2, 3, 4)) -> Verdict:
    box, grid = LatticeBox(1, 32), TorusGrid(1, 128)
    steps, exps = {}, {}
    for name, (a, b) in compose_pairs().items():
        exact = finite_section(a, box, grid) @ finite_section(b, box, grid)
        e = [remainder_order_probe(exact, compose_symbols(a, b, n, grid), grid, margin=2).fitted_exponent
             for n in n_terms_list]
        exps[name] = e
        steps[name] = [x - y for x, y in zip(e, e[1:])]
    flat = [d for v in steps.values() for d in v]
    worst = max(abs(d - 1.0) for d in flat)
    return Verdict("C4", "composition remainder order", bool(worst <= 0.3 and len(steps) >= 3), worst,
                   "|exponent step - 1| <= 0.3 on >= 3 pairs", {"exponents": exps, "steps": steps})


def check_parametrix(J: int = 3, R: float = 4.0, t_values=(0, 1, 2)) -> Verdict:
    box, grid = LatticeBox(1, 32), TorusGrid(1, 128)
    res = build_parametrix(elliptic_demo(1), J=J, R=R, grid=grid, box=box, t_values=t_values)
    final = max(max(res.left.norms.values()), max(res.right.norms.values()))
    hist = [max(h["left"].values()) for h in res.history]
    nonincreasing = all(b <= a for a, b in zip(hist, hist[1:]))
    diag_worst = 0.0
    for m in (1.0, 2.0):
        d = build_parametrix(japanese_bracket(m), J=J, R=R, grid=grid, box=box, t_values=t_values)
        diag_worst = max(diag_worst, max(d.left.norms.values()), max(d.right.norms.values()))
    passed = final < 1e-3 and nonincreasing and diag_worst < 1e-8
    return Verdict("C5", "parametrix", bool(passed), final,
                   "high-frequency residual H^0->H^t < 1e-3 for t in {0,1,2}, non-increasing in J; "
                   "diagonal case < 1e-8",
                   {"left": res.left.norms, "right": res.right.norms, "history": res.history,
                    "diagonal_worst": diag_worst})


def check_regularity() -> Verdict:
    rep = elliptic_regularity_experiment(elliptic_demo(1), lambda p: np.all(p == 0, axis=1).astype(float),
                                         0.0, (16, 32))
    return Verdict("C6", "elliptic regularity", rep.plateaued, rep.plateau_change,
                   "relative change of ||u||_{H^1} between N=16 and N=32 < 0.02", rep.to_dict())


def check_boundedness() -> Verdict:
    worst, rows = 0.0, []
    for name, a, s in boundedness_cases():
        norms = []
        for N in (16, 32):
            box = LatticeBox(1, N)
            norms.append(operator_norm_estimate(finite_section(a, box, TorusGrid.for_box(box, 64), s, s - a.order)))
        change = abs(norms[1] - norms[0]) / norms[0]
        worst = max(worst, change)
        rows.append({"symbol": name, "s": s, "N16": norms[0], "N32": norms[1], "change": change})
    return Verdict("C7", "boundedness", worst < 0.05, worst, "relative norm change N=16 -> 32 < 0.05",
                   {"rows": rows})


def check_duality(trials: int = 1000) -> Verdict:
    worst_cs, worst_att = 0.0, 0.0
    for name, u in lattice_corpus().items():
        for s in (-2.0, -0.5, 0.0, 0.5, 2.0):
            rep = duality_check(u, s, trials, seed=11)
            worst_cs = max(worst_cs, rep.max_violation)
            worst_att = max(worst_att, rep.attain_error)
    passed = worst_cs <= 1e-12 and worst_att <= 1e-10
    return Verdict("C8", "duality", bool(passed), max(worst_cs, worst_att),
                   "Cauchy-Schwarz violation <= 1e-12; maximizer attains norm to 1e-10",
                   {"max_violation": worst_cs, "max_attain_error": worst_att, "trials": trials})


def check_block_deficiency(radii=(8, 16, 32), n_terms: int = 6) -> Verdict:
    herm = 1.0 + 1.0
    for a in hermitian_cases().values():
        for mode in ("exact", "expansion"):
            T = build_block(a, 0.0, 0.0, LatticeBox(1, 8), TorusGrid(1, 64), mode, n_terms)
            for sign in (1, -1):
                herm = min(herm, deficiency_probe(T, sign, radii).min_sigma)
    sigma, defects = 2.0, {}
    for name, (a, s1, s2, m) in block_cases().items():
        T = build_block(a, s1, s2, LatticeBox(1, 8), TorusGrid(1, 64), "exact")
        for sign in (1, -1):
            sigma = min(sigma, deficiency_probe(T, sign, radii).min_sigma)
        box = LatticeBox(1, max(radii))
        Te = build_block(a, s1, s2, box, TorusGrid.for_box(box, 128), "expansion", n_terms)
        defects[name] = symmetry_defect(Te)
    worst_defect = max(defects.values())
    passed = herm >= 1.0 - 1e-12 and sigma >= 0.9 and worst_defect < 1e-6
    return Verdict("C9", "block operator / deficiency", bool(passed), worst_defect,
                   "Hermitian sigma_min >= 1; exact-weighted sigma_min >= 0.9; "
                   f"expansion interior symmetry defect < 1e-6 at N_terms={n_terms}",
                   {"hermitian_sigma_min": herm, "elliptic_sigma_min": sigma, "expansion_defects": defects})


def check_pq_ellipticity() -> Verdict:
    worst, rows = np.inf, {}
    for name, (a, s1, s2, m) in block_cases().items():
        cert = ellipticity_of_PQplusI(a, s1, s2, m)
        rows[name] = cert.to_dict()
        worst = min(worst, cert.certificate.constant if cert.certificate.passed else 0.0)
    passed = all(r["certificate"]["passed"] for r in rows.values())
    return Verdict("C10", "ellipticity of PQ+I", passed, float(worst),
                   "certificate constant >= c_min = 1e-8 at order 2m+2s2-2s1", rows)


def check_riesz(n_terms: int = 6) -> Verdict:
    box, grid = LatticeBox(1, 32), TorusGrid(1, 128)
    worst_exact, ok, rows = 0.0, True, {}
    for name, (a, s1, s2, m) in block_cases().items():
        rep = riesz_consistency(a, s1, s2, box, grid, n_terms)
        rows[name] = rep.to_dict()
        worst_exact = max(worst_exact, rep.exact_difference)
        ok = ok and rep.passed()
    return Verdict("C11", "Riesz-weight consistency", bool(ok), worst_exact,
                   "exact-weighted entrywise < 1e-12; expansion mode within its budget", rows)


CRITERIA = {
    "C1": check_plancherel,
    "C2": check_quantization_exactness,
    "C3": check_formal_adjoint,
    "C4": check_composition_order,
    "C5": check_parametrix,
    "C6": check_regularity,
    "C7": check_boundedness,
    "C8": check_duality,
    "C9": check_block_deficiency,
    "C10": check_pq_ellipticity,
    "C11": check_riesz,
}


def run_corpus(keys=None) -> list:
    return [CRITERIA[k]() for k in (keys or CRITERIA)]
