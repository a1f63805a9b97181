"""Symbol description format: plain dicts, stored as JSON or YAML.

Every Symbol's ``describe()`` produces one of the node kinds below, and
``parse_symbol`` turns it back into an equivalent Symbol.

    {"builtin": name, "params": {...}, "dim": n}
    {"expr": "L(1) * (2 + cos(2*pi*x1))", "order": 1, "dim": 1}
    {"sum": [node, ...]}                {"product": [node, ...]}
    {"scale": [re, im], "of": node}     {"conj": node}
    {"difference": [a1, ..., an], "of": node}
    {"cutoff": R, "of": node}
    {"excised_inverse": {"radius": R, "eps": e}, "of": node}
    {"tabulated": {"radius", "halo", "M", "order", "real", "imag"}}
    {"derived": "compose", "n_terms": N, "M": M, "a": node, "b": node}
    {"derived": "adjoint", "n_terms": N, "M": M, "a": node}
    {"derived": "parametrix_step", "step", "n_terms", "M", "q0", "p", "prev"}

Any node may carry "order" to re-declare the order of the result.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import yaml

from .calculus import adjoint_symbol, compose_symbols
from .fourier import TorusGrid
from .lattice import LatticeBox
from .parametrix import CorrectionSymbol
from .symbols import (ConjugateSymbol, CutoffSymbol, DifferencedSymbol, ExcisedInverseSymbol, ExpressionSymbol,
                      ProductSymbol, ScaledSymbol, SumSymbol, Symbol, TabulatedSymbol, builtin)


class DescriptionError(ValueError):
    """Malformed symbol description."""


def _require(node: dict, *keys):
    missing = [k for k in keys if k not in node]
    if missing:
        raise DescriptionError(f"description node {sorted(node)} lacks {missing}")


def _parse(node, dim: int | None) -> Symbol:
    if isinstance(node, str):
        return builtin(node, {}, dim or 1)
    if not isinstance(node, dict):
        raise DescriptionError(f"expected a mapping, got {type(node).__name__}")
    if "builtin" in node:
        return builtin(node["builtin"], node.get("params") or {}, int(node.get("dim", dim or 1)))
    if "expr" in node:
        _require(node, "order")
        return ExpressionSymbol(str(node["expr"]), int(node.get("dim", dim or 1)), float(node["order"]))
    if "sum" in node:
        return SumSymbol([_parse(t, dim) for t in node["sum"]])
    if "product" in node:
        return ProductSymbol([_parse(t, dim) for t in node["product"]])
    if "scale" in node:
        _require(node, "of")
        sc = node["scale"]
        sc = complex(sc[0], sc[1]) if isinstance(sc, (list, tuple)) else complex(sc)
        return ScaledSymbol(sc, _parse(node["of"], dim))
    if "conj" in node:
        return ConjugateSymbol(_parse(node["conj"], dim))
    if "difference" in node:
        _require(node, "of")
        return DifferencedSymbol(_parse(node["of"], dim), node["difference"])
    if "cutoff" in node:
        _require(node, "of")
        return CutoffSymbol(_parse(node["of"], dim), float(node["cutoff"]))
    if "excised_inverse" in node:
        _require(node, "of")
        opts = node["excised_inverse"]
        return ExcisedInverseSymbol(_parse(node["of"], dim), float(opts["radius"]), float(opts.get("eps", 0.0)))
    if "tabulated" in node:
        t = node["tabulated"]
        table = np.asarray(t["real"], dtype=float) + 1j * np.asarray(t["imag"], dtype=float)
        dim_t = table.ndim - 1
        box = LatticeBox(dim_t, int(t["radius"]), int(t.get("halo", 0)))
        return TabulatedSymbol(box, TorusGrid(dim_t, int(t["M"])), table, float(t["order"]))
    if "derived" in node:
        return _parse_derived(node, dim)
    raise DescriptionError(f"unrecognized description node with keys {sorted(node)}")


def _parse_derived(node: dict, dim: int | None) -> Symbol:
    kind = node["derived"]
    _require(node, "n_terms", "M")
    n_terms, M = int(node["n_terms"]), int(node["M"])
    if kind == "compose":
        _require(node, "a", "b")
        a, b = _parse(node["a"], dim), _parse(node["b"], dim)
        return compose_symbols(a, b, n_terms, TorusGrid(a.dim, M)).symbol
    if kind == "adjoint":
        _require(node, "a")
        a = _parse(node["a"], dim)
        return adjoint_symbol(a, n_terms, TorusGrid(a.dim, M)).symbol
    if kind == "parametrix_step":
        _require(node, "q0", "p", "prev", "step")
        p = _parse(node["p"], dim)
        return CorrectionSymbol(_parse(node["prev"], dim), _parse(node["q0"], dim), p, n_terms,
                                TorusGrid(p.dim, M), int(node["step"]))
    raise DescriptionError(f"unknown derived kind {kind!r}")


def parse_symbol(node, dim: int | None = None) -> Symbol:
    """Build a Symbol from a description node (a builtin name string is accepted too)."""
    try:
        sym = _parse(node, dim)
    except (KeyError, TypeError) as exc:
        raise DescriptionError(f"malformed symbol description: {exc}") from None
    if isinstance(node, dict) and "order" in node and "expr" not in node:
        sym = sym.with_order(float(node["order"]))
    if dim is not None and sym.dim != dim:
        raise DescriptionError(f"symbol has dimension {sym.dim}, expected {dim}")
    return sym


def load_description(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text)


def load_symbol(path, dim: int | None = None) -> Symbol:
    return parse_symbol(load_description(path), dim)


def save_symbol(sym: Symbol, path) -> None:
    desc = sym.describe()
    if str(path).endswith(".json"):
        Path(path).write_text(json.dumps(desc, indent=2, sort_keys=True) + "\n")
    else:
        Path(path).write_text(yaml.safe_dump(desc, sort_keys=True))
