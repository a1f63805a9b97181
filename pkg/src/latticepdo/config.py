"""Experiment configuration: defaults, JSON-schema validation and dotted overrides.

A config is a YAML or JSON mapping.  Missing keys take the defaults below;
the fully resolved config is embedded in every report.  Desk-scale defaults
are N = 32, M = 128 in one dimension and N = 12 in two (the largest radius
accepted there).
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema
import yaml

MAX_RADIUS_2D = 12


class ConfigError(ValueError):
    """Invalid experiment configuration (reported with exit status 2)."""


DEFAULTS = {
    "dimension": 1,
    "lattice": {"N": None, "halo": 0, "scan": [8, 16, 32]},
    "grid": {"M": None},
    "symbol": {"builtin": "elliptic_demo", "params": {"m": 1}},
    "symbol_b": {"builtin": "japanese_bracket", "params": {"s": 0.5}},
    "sobolev": {"s": 0.0, "s1": 0.0, "s2": 0.0},
    "expansion": {"n_terms": 4},
    "scan": {"K": 32, "R": 0.0, "c_min": 1e-8, "orders": 1, "require_elliptic": True},
    "quantize": {"expect": None},
    "asym_sum": {"symbols": [{"builtin": "japanese_bracket", "params": {"s": -1}},
                             {"builtin": "japanese_bracket", "params": {"s": -2}},
                             {"builtin": "japanese_bracket", "params": {"s": -3}}],
                 "radii": None},
    "parametrix": {"J": 3, "R": 4.0, "eps": 0.0, "t": [0, 1, 2, 3]},
    "regularity": {"f": "delta0", "radii": [8, 16, 32]},
    "adjointness": {"mode": "exact", "m": None, "trials": 1000, "duality_s": [-2, -0.5, 0, 0.5, 2]},
    "tolerances": {"oracle": 1e-12, "monotone": 0.10, "slack": 0.05, "plateau": 0.02, "sigma_min": 0.9,
                   "duality_cs": 1e-12, "duality_attain": 1e-10, "residual": None},
    "output": {"dir": None, "prefix": ""},
    "seed": 0,
}

_number = {"type": "number"}
_increasing_ints = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
_symbol = {"anyOf": [{"type": "object"}, {"type": "string"}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
        "lattice": {"type": "object", "additionalProperties": False, "properties": {
            "N": {"type": ["integer", "null"], "minimum": 1},
            "halo": {"type": "integer", "minimum": 0},
            "scan": _increasing_ints}},
        "grid": {"type": "object", "additionalProperties": False,
                 "properties": {"M": {"type": ["integer", "null"], "minimum": 1}}},
        "symbol": _symbol,
        "symbol_b": _symbol,
        "sobolev": {"type": "object", "additionalProperties": False,
                    "properties": {"s": _number, "s1": _number, "s2": _number}},
        "expansion": {"type": "object", "additionalProperties": False,
                      "properties": {"n_terms": {"type": "integer", "minimum": 1}}},
        "scan": {"type": "object", "additionalProperties": False, "properties": {
            "K": {"type": "integer", "minimum": 1}, "R": {"type": "number", "minimum": 0},
            "c_min": {"type": "number", "exclusiveMinimum": 0},
            "orders": {"type": "integer", "minimum": 0}, "require_elliptic": {"type": "boolean"}}},
        "quantize": {"type": "object", "additionalProperties": False,
                     "properties": {"expect": {"enum": [None, "identity", "diagonal"]}}},
        "asym_sum": {"type": "object", "additionalProperties": False, "properties": {
            "symbols": {"type": "array", "items": _symbol, "minItems": 1},
            "radii": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0}}}},
        "parametrix": {"type": "object", "additionalProperties": False, "properties": {
            "J": {"type": "integer", "minimum": 0}, "R": {"type": "number", "minimum": 0},
            "eps": {"type": "number", "minimum": 0},
            "t": {"type": "array", "items": {"type": "number"}, "minItems": 1}}},
        "regularity": {"type": "object", "additionalProperties": False, "properties": {
            "f": {"anyOf": [{"enum": ["delta0"]},
                            {"type": "object", "required": ["decay"],
                             "properties": {"decay": {"type": "number", "exclusiveMinimum": 0}}}]},
            "radii": _increasing_ints}},
        "adjointness": {"type": "object", "additionalProperties": False, "properties": {
            "mode": {"enum": ["exact", "expansion"]}, "m": {"type": ["number", "null"]},
            "trials": {"type": "integer", "minimum": 1},
            "duality_s": {"type": "array", "items": _number, "minItems": 1}}},
        "tolerances": {"type": "object", "additionalProperties": False, "properties": {
            "oracle": _number, "monotone": _number, "slack": _number, "plateau": _number,
            "sigma_min": _number, "duality_cs": _number, "duality_attain": _number,
            "residual": {"type": ["number", "null"]}}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": ["string", "null"]}, "prefix": {"type": "string"}}},
        "seed": {"type": "integer", "minimum": 0},
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("symbol", "symbol_b"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply ``a.b.c=value`` in place; the value is parsed as YAML (numbers, lists, null...)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form path=value")
    path, raw = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"empty override path in {assignment!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {raw!r}: {exc}") from None
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def _strictly_increasing(values) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


def resolve(raw: dict | None = None, overrides=()) -> dict:
    """Merge defaults, the raw mapping and overrides; validate; fill grid/lattice defaults."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    cfg = _merge(DEFAULTS, raw)
    for item in overrides:
        apply_override(cfg, item)
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from None
    dim = cfg["dimension"]
    lat = cfg["lattice"]
    if lat["N"] is None:
        lat["N"] = 32 if dim == 1 else MAX_RADIUS_2D
    if dim >= 2 and lat["N"] > MAX_RADIUS_2D:
        raise ConfigError(f"dimension {dim} is capped at N = {MAX_RADIUS_2D}, got N = {lat['N']}")
    need = 2 * (lat["N"] + lat["halo"]) + 1
    if cfg["grid"]["M"] is None:
        cfg["grid"]["M"] = 128 if dim == 1 and need <= 128 else 1 << (need - 1).bit_length()
    if cfg["grid"]["M"] < need:
        raise ConfigError(f"grid M = {cfg['grid']['M']} violates M >= 2(N + halo) + 1 = {need}")
    for path, seq in (("lattice.scan", lat["scan"]), ("regularity.radii", cfg["regularity"]["radii"])):
        if not _strictly_increasing(seq):
            raise ConfigError(f"{path} must be strictly increasing, got {seq}")
    radii = cfg["asym_sum"]["radii"]
    if radii is not None and any(b < a for a, b in zip(radii, radii[1:])):
        raise ConfigError("asym_sum.radii must be non-decreasing")
    return cfg


def load_config(path=None, overrides=()) -> dict:
    raw = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} does not exist")
        text = p.read_text()
        try:
            raw = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from None
    return resolve(raw or {}, overrides)
