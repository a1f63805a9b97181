"""Command-line driver.

    latticepdo SUBCOMMAND [--config FILE] [--set path=value ...] [--output-dir DIR]

Each run writes ``<prefix><subcommand>.json`` (resolved config, results and
verdicts) plus CSV tables into the output directory, which defaults to
$LATTICEPDO_OUTPUT_DIR or ./latticepdo-output.  Exit status: 0 when every
verdict passes, 1 when one fails, 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import corpus
from .adjointness import build_block, deficiency_probe, duality_check, ellipticity_of_PQplusI
from .calculus import adjoint_symbol, asymptotic_sum, compose_symbols, remainder_order_probe
from .classes import check_ellipticity, estimate_seminorm
from .config import ConfigError, load_config
from .description import DescriptionError, parse_symbol
from .fourier import TorusGrid
from .lattice import LatticeBox, LatticeFunction, multi_indices
from .parametrix import NotEllipticError, build_parametrix, elliptic_regularity_experiment
from .quantization import apply, finite_section

ENV_OUTPUT = "LATTICEPDO_OUTPUT_DIR"
SUBCOMMANDS = ("symbol-check", "quantize", "compose", "adjoint", "asym-sum", "parametrix", "regularity",
               "adjointness", "corpus")


class Run:
    """Collects results, verdicts and CSV tables for one subcommand."""

    def __init__(self, name: str, cfg: dict, outdir: Path):
        self.name, self.cfg, self.outdir = name, cfg, outdir
        self.results: dict = {}
        self.verdicts: list = []
        self.tables: list = []

    def verdict(self, name: str, passed: bool, value, tolerance: str):
        self.verdicts.append({"name": name, "passed": bool(passed), "value": _plain(value), "tolerance": tolerance})

    def table(self, stem: str, header, rows):
        path = self.outdir / f"{self.cfg['output']['prefix']}{self.name}_{stem}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        self.tables.append(path.name)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)


def _plain(obj):
    """JSON-friendly copy: numpy scalars to Python, non-finite floats to strings, keys to str."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _setup(cfg):
    dim = cfg["dimension"]
    box = LatticeBox(dim, cfg["lattice"]["N"], cfg["lattice"]["halo"])
    grid = TorusGrid(dim, cfg["grid"]["M"])
    return box, grid


def _symbol(cfg, key="symbol"):
    return parse_symbol(cfg[key], cfg["dimension"])


# -- subcommands ----------------------------------------------------------

def cmd_symbol_check(run: Run):
    cfg = run.cfg
    a = _symbol(cfg)
    _, grid = _setup(cfg)
    sc = cfg["scan"]
    rows = []
    for oa in range(sc["orders"] + 1):
        for ob in range(sc["orders"] + 1):
            for alpha in multi_indices(a.dim, oa):
                for beta in multi_indices(a.dim, ob):
                    rep = estimate_seminorm(a, alpha, beta, sc["K"], grid, slack=cfg["tolerances"]["slack"])
                    rows.append(rep)
                    run.verdict(f"seminorm alpha={tuple(alpha)} beta={tuple(beta)}", rep.accepted, rep.growth,
                                f"growth slope <= slack {rep.slack}")
    run.table("seminorms", ["alpha", "beta", "constant", "growth", "accepted"],
              [(" ".join(map(str, r.alpha)), " ".join(map(str, r.beta)), r.constant, r.growth, int(r.accepted))
               for r in rows])
    cert = check_ellipticity(a, sc["R"], sc["K"], grid, sc["c_min"])
    run.results["seminorms"] = [r.to_dict() for r in rows]
    run.results["ellipticity"] = cert.to_dict()
    if sc["require_elliptic"]:
        run.verdict("ellipticity", cert.passed, cert.constant, f"C >= c_min = {sc['c_min']:g}")


def cmd_quantize(run: Run):
    cfg = run.cfg
    a = _symbol(cfg)
    box, grid = _setup(cfg)
    A = finite_section(a, box, grid)
    rng = np.random.default_rng(cfg["seed"])
    u = LatticeFunction.from_interior(box, rng.standard_normal(box.interior_size)
                                      + 1j * rng.standard_normal(box.interior_size))
    via_apply = apply(a, u, grid).interior().ravel()
    via_section = A.matrix @ u.interior().ravel()
    err = float(np.linalg.norm(via_apply - via_section) / np.linalg.norm(via_apply))
    tol = cfg["tolerances"]["oracle"]
    run.verdict("section matches apply", err < tol, err, f"relative error < {tol:g}")
    off = float(np.max(np.abs(A.matrix - np.diag(np.diag(A.matrix)))))
    ident = float(np.max(np.abs(A.matrix - np.eye(len(A.matrix)))))
    run.results.update(relative_error=err, max_off_diagonal=off, identity_error=ident)
    expect = cfg["quantize"]["expect"]
    if expect == "identity":
        run.verdict("identity", ident < tol, ident, f"max |A - I| < {tol:g}")
    elif expect == "diagonal":
        run.verdict("diagonal", off < tol, off, f"max off-diagonal < {tol:g}")
    pts = box.interior_points()
    run.table("section", ["row", "col", "real", "imag"],
              [(i, j, A.matrix[i, j].real, A.matrix[i, j].imag)
               for i in range(len(pts)) for j in range(len(pts)) if A.matrix[i, j] != 0])


def _residual_series(run: Run, label: str, series, n_list):
    tol = run.cfg["tolerances"]["monotone"]
    mono = corpus.monotone_within(series, tol)
    run.verdict(f"{label} residual monotone in N_terms", mono, max(series[-1], 0.0),
                f"each step <= (1 + {tol:g}) x previous")
    run.table("residuals", ["n_terms", "residual"], list(zip(n_list, series)))


def cmd_compose(run: Run):
    cfg = run.cfg
    a, b = _symbol(cfg), _symbol(cfg, "symbol_b")
    box, grid = _setup(cfg)
    n_list = list(range(1, cfg["expansion"]["n_terms"] + 1))
    series = corpus.compose_residuals(a, b, box, grid, n_list)
    exact = finite_section(a, box, grid) @ finite_section(b, box, grid)
    probe = remainder_order_probe(exact, compose_symbols(a, b, n_list[-1], grid), grid, margin=2)
    run.results.update(n_terms=n_list, band_residuals=series, fitted_exponent=probe.fitted_exponent,
                       claimed_order=probe.claimed_order, residual_scalar=probe.residual)
    _residual_series(run, "composition", series, n_list)
    run.table("shells", ["shell_radius", "residual_norm", "reference_power"], probe.shells)


def cmd_adjoint(run: Run):
    cfg = run.cfg
    a = _symbol(cfg)
    box, grid = _setup(cfg)
    n_list = list(range(1, cfg["expansion"]["n_terms"] + 1))
    series = corpus.adjoint_residuals(a, box, grid, n_list)
    exact = finite_section(a, box, grid)
    exact.matrix = exact.matrix.conj().T
    probe = remainder_order_probe(exact, adjoint_symbol(a, n_list[-1], grid), grid, margin=2 + n_list[-1])
    run.results.update(n_terms=n_list, band_residuals=series, fitted_exponent=probe.fitted_exponent,
                       claimed_order=probe.claimed_order, residual_scalar=probe.residual)
    _residual_series(run, "adjoint", series, n_list)
    run.table("shells", ["shell_radius", "residual_norm", "reference_power"], probe.shells)


def cmd_asym_sum(run: Run):
    cfg = run.cfg
    syms = [parse_symbol(d, cfg["dimension"]) for d in cfg["asym_sum"]["symbols"]]
    _, grid = _setup(cfg)
    total = asymptotic_sum(syms, cfg["asym_sum"]["radii"], TorusGrid(cfg["dimension"], 32), K=cfg["scan"]["K"])
    checks = total.meta["radius_checks"]
    run.results.update(radii=total.meta["radii"], checks=checks, orders=[s.order for s in syms])
    for c in checks:
        run.verdict(f"term {c['term']} contribution", c["ok"], c["contribution"],
                    f"<= 2^-{c['term']} x first term = {c['bound']:.6g}")
    run.table("radii", ["term", "radius", "contribution", "bound"],
              [(c["term"], c["radius"], c["contribution"], c["bound"]) for c in checks])


def cmd_parametrix(run: Run):
    cfg = run.cfg
    p = _symbol(cfg)
    box, grid = _setup(cfg)
    pc = cfg["parametrix"]
    try:
        res = build_parametrix(p, pc["J"], pc["R"], pc["eps"], grid, box, cfg["sobolev"]["s"], tuple(pc["t"]),
                               K=cfg["scan"]["K"], c_min=cfg["scan"]["c_min"])
    except NotEllipticError as exc:
        run.results["error"] = str(exc)
        run.verdict("ellipticity precondition", False, 0.0, f"certificate C >= c_min = {cfg['scan']['c_min']:g}")
        return
    run.results.update(res.to_dict())
    tol = cfg["tolerances"]["monotone"]
    for side in ("left", "right"):
        worst = [max(h[side].values()) for h in res.history]
        ok = corpus.monotone_within(worst, tol)
        run.verdict(f"{side} residual non-increasing in J", ok, worst[-1], f"each step <= (1 + {tol:g}) x previous")
    lmax, rmax = max(res.left.norms.values()), max(res.right.norms.values())
    ratio = max(lmax, rmax) / min(lmax, rmax) if min(lmax, rmax) > 0 else 1.0
    run.verdict("QP - I and PQ - I agree", ratio <= 4.0, ratio, "ratio of residual norms <= 4")
    if cfg["tolerances"]["residual"] is not None:
        bound = cfg["tolerances"]["residual"]
        run.verdict("high-frequency residual", max(lmax, rmax) < bound, max(lmax, rmax), f"< {bound:g} for every t")
    run.table("residual_left", ["t", "shell", "norm"], res.left.shells)
    run.table("residual_right", ["t", "shell", "norm"], res.right.shells)


def _regularity_rhs(choice):
    if choice == "delta0":
        return lambda p: np.all(p == 0, axis=1).astype(float)
    decay = float(choice["decay"])
    return lambda p: (1.0 + np.sqrt(np.sum(p.astype(float) ** 2, axis=1))) ** -decay


def cmd_regularity(run: Run):
    cfg = run.cfg
    a = _symbol(cfg)
    rc = cfg["regularity"]
    rep = elliptic_regularity_experiment(a, _regularity_rhs(rc["f"]), cfg["sobolev"]["s"], rc["radii"],
                                         tolerance=cfg["tolerances"]["plateau"])
    run.results.update(rep.to_dict())
    run.verdict("H^{s+m} norm plateaus", rep.plateaued, rep.plateau_change,
                f"relative change between last two radii <= {rep.tolerance:g}")
    rep_rows = list(zip(rep.radii, rep.norms, rep.contrast, [int(s) for s in rep.singular]))
    run.table("norms", ["N", "norm_s_plus_m", "norm_s_plus_m_plus_1", "singular"], rep_rows)


def cmd_adjointness(run: Run):
    cfg = run.cfg
    a = _symbol(cfg)
    box, grid = _setup(cfg)
    s1, s2 = cfg["sobolev"]["s1"], cfg["sobolev"]["s2"]
    ac = cfg["adjointness"]
    m = a.order if ac["m"] is None else float(ac["m"])
    T = build_block(a, s1, s2, box, grid, ac["mode"], cfg["expansion"]["n_terms"])
    hypothesis = m > s1 - s2
    run.results["hypothesis_met"] = hypothesis
    if not hypothesis:
        run.results["note"] = "hypothesis m > s1 - s2 not met; exploratory results only"
    rows = []
    for sign in (1, -1):
        rep = deficiency_probe(T, sign, cfg["lattice"]["scan"])
        run.results[f"deficiency{'+' if sign > 0 else '-'}"] = rep.to_dict()
        rows += [(sign, N, sig, d) for N, sig, d in rep.rows]
        if hypothesis:
            bound = cfg["tolerances"]["sigma_min"]
            run.verdict(f"sigma_min(T {'+' if sign > 0 else '-'} iI)", rep.min_sigma >= bound, rep.min_sigma,
                        f">= {bound:g} for every N in the scan")
    run.table("deficiency", ["sign", "N", "sigma_min", "defect"], rows)
    u = corpus.lattice_corpus(box, cfg["seed"])["random"]
    duality = []
    for s in ac["duality_s"]:
        rep = duality_check(u, s, ac["trials"], cfg["seed"])
        duality.append(rep.to_dict())
        run.verdict(f"duality s={s:g}", rep.passed(cfg["tolerances"]["duality_cs"], cfg["tolerances"]["duality_attain"]),
                    max(rep.max_violation, rep.attain_error),
                    f"violation <= {cfg['tolerances']['duality_cs']:g}, "
                    f"attain error <= {cfg['tolerances']['duality_attain']:g}")
    run.results["duality"] = duality
    cert = ellipticity_of_PQplusI(a, s1, s2, m, cfg["scan"]["R"], cfg["scan"]["K"], grid,
                                  cfg["expansion"]["n_terms"], cfg["scan"]["c_min"])
    run.results["pq_plus_identity"] = cert.to_dict()
    if hypothesis:
        run.verdict("PQ + I elliptic", cert.certificate.passed, cert.certificate.constant,
                    f"C >= c_min = {cfg['scan']['c_min']:g} at order {cert.order:g}")


def cmd_corpus(run: Run):
    verdicts = corpus.run_corpus()
    for v in verdicts:
        run.verdict(f"{v.key} {v.title}", v.passed, v.value, v.tolerance)
    run.results["criteria"] = [v.to_dict() for v in verdicts]
    run.table("summary", ["criterion", "passed", "value"], [(v.key, int(v.passed), v.value) for v in verdicts])


COMMANDS = {
    "symbol-check": cmd_symbol_check, "quantize": cmd_quantize, "compose": cmd_compose, "adjoint": cmd_adjoint,
    "asym-sum": cmd_asym_sum, "parametrix": cmd_parametrix, "regularity": cmd_regularity,
    "adjointness": cmd_adjointness, "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticepdo", description="Lattice pseudo-differential experiments.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", "-c", help="YAML or JSON experiment config")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                        help="override a config entry by dotted path, e.g. sobolev.s1=0.5")
    parser.add_argument("--output-dir", "-o", help=f"output directory (default ${ENV_OUTPUT} or ./latticepdo-output)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        outdir = Path(args.output_dir or cfg["output"]["dir"] or os.environ.get(ENV_OUTPUT) or "latticepdo-output")
        cfg["output"]["dir"] = str(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        run = Run(args.subcommand, cfg, outdir)
        start = time.perf_counter()
        COMMANDS[args.subcommand](run)
    except (ConfigError, DescriptionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # invalid symbol parameters and similar input problems surface here
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    report = {"subcommand": args.subcommand, "config": cfg, "results": run.results, "verdicts": run.verdicts,
              "passed": run.passed, "tables": run.tables, "timing_seconds": time.perf_counter() - start}
    path = outdir / f"{cfg['output']['prefix']}{args.subcommand}.json"
    path.write_text(json.dumps(_plain(report), indent=2, sort_keys=True) + "\n")
    for v in run.verdicts:
        print(f"[{'PASS' if v['passed'] else 'FAIL'}] {v['name']}: {v['value']} ({v['tolerance']})")
    if "note" in run.results:
        print(f"note: {run.results['note']}")
    print(f"report: {path}")
    return 0 if run.passed else 1


if __name__ == "__main__":
    sys.exit(main())
