"""Reference Bell squares used by the example files and the tests."""

from __future__ import annotations

import numpy as np

from .diagram import CORNERS, PAIRS, BellSquare
from .finprob import FinSpace
from .quantum import epr_bell_square

ALTERNATING_RVS = {c: [1, -1] for c in CORNERS}


def _binary(c: str, probs) -> FinSpace:
    return FinSpace([f"{c.lower()}1", f"{c.lower()}2"], probs)


def product_square() -> BellSquare:
    corners = {"Q": _binary("Q", [0.3, 0.7]), "R": _binary("R", [0.6, 0.4]),
               "S": _binary("S", [0.25, 0.75]), "T": _binary("T", [0.5, 0.5])}
    return BellSquare.product_square(corners)


def pr_box_square() -> BellSquare:
    """Uniform marginals; outcomes agree on QS, RS, RT and disagree on QT."""
    corners = {c: _binary(c, [0.5, 0.5]) for c in CORNERS}
    agree = np.array([[0.5, 0.0], [0.0, 0.5]])
    tables = {p: (agree[::-1] if p == "QT" else agree) for p in PAIRS}
    return BellSquare.from_tables(corners, tables)


def deterministic_square() -> BellSquare:
    corners = {c: _binary(c, [1.0, 0.0]) for c in CORNERS}
    point = np.array([[1.0, 0.0], [0.0, 0.0]])
    return BellSquare.from_tables(corners, {p: point for p in PAIRS})


def quantum_epr_square() -> BellSquare:
    return epr_bell_square()


#: file name -> (builder, random variables stored with it)
EXAMPLES = {
    "product.json": (product_square, None),
    "quantum_epr.json": (quantum_epr_square, ALTERNATING_RVS),
    "pr_box.json": (pr_box_square, ALTERNATING_RVS),
    "deterministic.json": (deterministic_square, ALTERNATING_RVS),
}
