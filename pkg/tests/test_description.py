import json

import numpy as np
import pytest

from latticepdo.calculus import adjoint_symbol, compose_symbols
from latticepdo.description import DescriptionError, load_symbol, parse_symbol, save_symbol
from latticepdo.fourier import TorusGrid
from latticepdo.lattice import LatticeBox
from latticepdo.parametrix import build_parametrix
from latticepdo.symbols import (CutoffSymbol, ExcisedInverseSymbol, ExpressionSymbol, axis_shift, elliptic_demo,
                                japanese_bracket, perturbed, tabulate, trig_poly)

GRID = TorusGrid(1, 32)
K = np.arange(-12, 13)[:, None]


def same_values(a, b):
    return np.allclose(a.sample(K, GRID), b.sample(K, GRID), atol=1e-12)


CASES = {
    "bracket": japanese_bracket(1.5),
    "trig": trig_poly({2: 0.25, -1: 0.5j}),
    "perturbed": perturbed(1, {1: 0.2, -1: 0.1}),
    "expr": ExpressionSymbol("L(0.5) * (3 + sin(2*pi*x1))", 1, 0.5),
    "sum_product": japanese_bracket(1) * axis_shift() + 2j * elliptic_demo(0.5),
    "conj": elliptic_demo(1).conj() - japanese_bracket(0),
    "cutoff": CutoffSymbol(elliptic_demo(1), 3.0),
    "excised": ExcisedInverseSymbol(elliptic_demo(1), 2.0),
    "reordered": japanese_bracket(1).with_order(2),
    "tabulated": tabulate(elliptic_demo(1), LatticeBox(1, 12), GRID),
    "compose": compose_symbols(elliptic_demo(1), japanese_bracket(0.5), 3, GRID).symbol,
    "adjoint": adjoint_symbol(japanese_bracket(1) * axis_shift(), 2, GRID).symbol,
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_round_trip_through_json_and_yaml(name, tmp_path):
    a = CASES[name]
    for suffix in (".json", ".yaml"):
        path = tmp_path / f"sym{suffix}"
        save_symbol(a, path)
        b = load_symbol(path, 1)
        assert b.order == a.order
        assert same_values(a, b)


def test_parametrix_step_round_trip():
    q = build_parametrix(elliptic_demo(1), J=1, R=4, grid=GRID).q
    desc = json.loads(json.dumps(q.describe()))
    assert desc["derived"] == "parametrix_step"
    assert same_values(q, parse_symbol(desc))


def test_string_node_and_errors():
    assert parse_symbol({"builtin": "japanese_bracket", "params": {"s": 2}}).order == 2
    assert parse_symbol("discrete_laplacian").order == 0
    with pytest.raises(DescriptionError):
        parse_symbol({"mystery": 1})
    with pytest.raises(DescriptionError):
        parse_symbol({"expr": "L(1)"})
    with pytest.raises(DescriptionError):
        parse_symbol({"derived": "compose", "n_terms": 2, "M": 32, "a": "discrete_laplacian"})
    with pytest.raises(DescriptionError):
        parse_symbol({"builtin": "japanese_bracket", "params": {"s": 1}, "dim": 2}, dim=1)
