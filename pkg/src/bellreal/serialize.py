"""JSON interchange for Bell squares and reports.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so ``load(dump(bs))`` reproduces every entry bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .chsh import ChshAssignment
from .diagram import CORNERS, PAIRS, BellSquare
from .finprob import FinSpace


class SquareFileError(ValueError):
    """The document is not a well-formed Bell square file."""


def square_to_dict(bs: BellSquare, rvs: Mapping[str, Any] | None = None) -> dict:
    doc: dict[str, Any] = {
        "corners": {
            c: {"labels": [str(l) for l in s.labels], "probs": [float(p) for p in s.probs]}
            for c, s in bs.corners.items()
        },
        "joints": {p: [[float(v) for v in row] for row in bs.table(p)] for p in PAIRS},
    }
    if rvs is not None:
        doc["rvs"] = {c: [int(v) for v in rvs[c]] for c in CORNERS}
    return doc


def square_from_dict(doc: Mapping) -> tuple[BellSquare, dict[str, list[float]] | None]:
    try:
        corners = {}
        for c in CORNERS:
            entry = doc["corners"][c]
            probs = [_number(v) for v in entry["probs"]]
            corners[c] = FinSpace([str(l) for l in entry["labels"]], probs)
        tables = {}
        for p in PAIRS:
            rows = doc["joints"][p]
            tables[p] = np.array([[_number(v) for v in row] for row in rows], dtype=float)
        bs = BellSquare.from_tables(corners, tables)
        rvs = None
        if doc.get("rvs") is not None:
            rvs = {c: [_number(v) for v in doc["rvs"][c]] for c in CORNERS}
            for c in CORNERS:
                if len(rvs[c]) != len(corners[c]):
                    raise SquareFileError(f"rvs for {c} has {len(rvs[c])} values, "
                                          f"corner has {len(corners[c])} outcomes")
    except SquareFileError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SquareFileError(f"malformed Bell square document: {exc!r}") from exc
    return bs, rvs


def _number(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SquareFileError(f"expected a number, got {v!r}")
    return float(v)


def dumps_square(bs: BellSquare, rvs=None) -> str:
    return json.dumps(square_to_dict(bs, rvs), indent=2)


def loads_square(text: str) -> tuple[BellSquare, dict | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SquareFileError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SquareFileError("top-level JSON value must be an object")
    return square_from_dict(doc)


def save_square(path, bs: BellSquare, rvs=None) -> None:
    Path(path).write_text(dumps_square(bs, rvs) + "\n", encoding="utf-8")


def load_square(path) -> tuple[BellSquare, dict | None]:
    return loads_square(Path(path).read_text(encoding="utf-8"))


def assignment_to_dict(a: ChshAssignment) -> dict:
    return {"signs": a.signs(), "minus": a.minus}
