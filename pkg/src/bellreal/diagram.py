"""Diagrams of probability-preserving maps, and Bell squares.

A :class:`Diagram` is a directed multigraph whose nodes carry finite
probability spaces and whose edges carry :class:`~bellreal.finprob.ProbMap`
values. Commutativity is decided on the underlying outcome functions, so it is
exact; probability consistency is a separate per-edge check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .finprob import (
    EPS,
    FinSpace,
    JointSpace,
    ProbMap,
    Violation,
    marginals,
    morphism_violations,
    validate_joint,
    validate_space,
)

CORNERS = ("Q", "R", "S", "T")
PAIRS = ("QS", "RS", "RT", "QT")


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    map: ProbMap
    name: str = ""


@dataclass(frozen=True, eq=False)
class Diagram:
    nodes: Mapping[str, FinSpace]
    edges: tuple[Edge, ...] = ()

    def __init__(self, nodes: Mapping[str, FinSpace], edges: Sequence[Edge] = ()):
        edges = tuple(edges)
        for e in edges:
            if e.source not in nodes or e.target not in nodes:
                raise KeyError(f"edge {e.name or (e.source, e.target)} has an unknown endpoint")
        object.__setattr__(self, "nodes", dict(nodes))
        object.__setattr__(self, "edges", edges)

    def out_edges(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.source == node]


def validate_diagram(d: Diagram, tol: float = EPS) -> list[Violation]:
    """Endpoint spaces must match the map's spaces, and each map must preserve probability."""
    out = []
    for e in d.edges:
        label = e.name or f"{e.source}->{e.target}"
        src, dst = d.nodes[e.source], d.nodes[e.target]
        if e.map.source.labels != src.labels or not e.map.source.close_to(src, tol):
            out.append(Violation("edge-source", "map source differs from node space", label))
        if e.map.target.labels != dst.labels or not e.map.target.close_to(dst, tol):
            out.append(Violation("edge-target", "map target differs from node space", label))
        for v in morphism_violations(e.map, tol):
            out.append(Violation(v.kind, v.message, (label, v.where)))
    return out


@dataclass(frozen=True)
class PathFailure:
    first: tuple[str, ...]
    second: tuple[str, ...]
    witness: object
    images: tuple

    def __str__(self) -> str:
        return (f"paths {' -> '.join(self.first)} and {' -> '.join(self.second)} "
                f"disagree at {self.witness!r}: {self.images[0]!r} vs {self.images[1]!r}")


@dataclass(frozen=True)
class CommutesReport:
    pairs_checked: int
    failures: tuple[PathFailure, ...] = field(default=())

    @property
    def commutes(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.commutes


def _assert_acyclic(d: Diagram) -> None:
    state: dict[str, int] = {}

    def visit(n: str) -> None:
        state[n] = 1
        for e in d.out_edges(n):
            s = state.get(e.target, 0)
            if s == 1:
                raise ValueError("cycles unsupported")
            if s == 0:
                visit(e.target)
        state[n] = 2

    for n in d.nodes:
        if state.get(n, 0) == 0:
            visit(n)


def _paths(d: Diagram, max_length: int) -> dict[tuple[str, str], list[tuple[Edge, ...]]]:
    found: dict[tuple[str, str], list[tuple[Edge, ...]]] = {}

    def extend(start: str, path: tuple[Edge, ...]) -> None:
        if len(path) == max_length:
            return
        tip = path[-1].target if path else start
        for e in d.out_edges(tip):
            p = path + (e,)
            found.setdefault((start, e.target), []).append(p)
            extend(start, p)

    for n in d.nodes:
        extend(n, ())
    return found


def _node_names(path: tuple[Edge, ...]) -> tuple[str, ...]:
    names = [path[0].source] + [e.target for e in path]
    return tuple(names)


def check_commutes(d: Diagram, max_length: int = 4) -> CommutesReport:
    """Compare every pair of distinct directed paths that share both endpoints.

    Paths are composed as outcome functions and compared label by label; the
    first disagreeing source label is reported as the witness.
    """
    _assert_acyclic(d)
    checked = 0
    failures = []
    for (start, _), paths in _paths(d, max_length).items():
        if len(paths) < 2:
            continue
        composed = []
        for p in paths:
            table = {x: x for x in d.nodes[start].labels}
            for e in p:
                table = {x: e.map.table[y] for x, y in table.items()}
            composed.append(table)
        for i in range(len(paths)):
            for k in range(i + 1, len(paths)):
                checked += 1
                for x in d.nodes[start].labels:
                    if composed[i][x] != composed[k][x]:
                        failures.append(PathFailure(
                            _node_names(paths[i]), _node_names(paths[k]), x,
                            (composed[i][x], composed[k][x])))
                        break
    return CommutesReport(checked, tuple(failures))


# -- Bell squares ------------------------------------------------------------

@dataclass(frozen=True)
class BellSquare:
    """Four corner spaces and the four joint tables QS, RS, RT, QT.

    Each joint has the first-named corner on its rows.
    """

    corners: Mapping[str, FinSpace]
    joints: Mapping[str, JointSpace]

    def __init__(self, corners: Mapping[str, FinSpace], joints: Mapping[str, JointSpace]):
        if set(corners) != set(CORNERS):
            raise ValueError(f"corners must be exactly {CORNERS}, got {sorted(corners)}")
        if set(joints) != set(PAIRS):
            raise ValueError(f"joints must be exactly {PAIRS}, got {sorted(joints)}")
        for pair in PAIRS:
            j = joints[pair]
            for side, name in ((j.left, pair[0]), (j.right, pair[1])):
                if side.labels != corners[name].labels:
                    raise ValueError(f"joint {pair} axis labels differ from corner {name}")
        object.__setattr__(self, "corners", {c: corners[c] for c in CORNERS})
        object.__setattr__(self, "joints", {p: joints[p] for p in PAIRS})

    @classmethod
    def from_tables(cls, corners: Mapping[str, FinSpace], tables: Mapping[str, object]) -> BellSquare:
        joints = {p: JointSpace(corners[p[0]], corners[p[1]], tables[p]) for p in PAIRS}
        return cls(corners, joints)

    @classmethod
    def from_joint_tables(cls, tables: Mapping[str, object],
                          labels: Mapping[str, Sequence] | None = None) -> BellSquare:
        """Build a square whose corners are the marginals of the given tables.

        Corner probabilities come from the first joint in which they appear
        (QS for Q and S, RT for R and T).
        """
        tables = {p: np.asarray(tables[p], dtype=float) for p in PAIRS}
        sizes = {"Q": tables["QS"].shape[0], "S": tables["QS"].shape[1],
                 "R": tables["RT"].shape[0], "T": tables["RT"].shape[1]}
        if labels is None:
            labels = {c: [f"{c.lower()}{i + 1}" for i in range(sizes[c])] for c in CORNERS}
        corners = {
            "Q": FinSpace(labels["Q"], tables["QS"].sum(axis=1)),
            "S": FinSpace(labels["S"], tables["QS"].sum(axis=0)),
            "R": FinSpace(labels["R"], tables["RT"].sum(axis=1)),
            "T": FinSpace(labels["T"], tables["RT"].sum(axis=0)),
        }
        return cls.from_tables(corners, tables)

    @classmethod
    def product_square(cls, corners: Mapping[str, FinSpace]) -> BellSquare:
        return cls.from_tables(corners, {p: np.outer(corners[p[0]].probs, corners[p[1]].probs)
                                         for p in PAIRS})

    def shape(self) -> tuple[int, int, int, int]:
        return tuple(len(self.corners[c]) for c in CORNERS)  # type: ignore[return-value]

    def table(self, pair: str) -> np.ndarray:
        return self.joints[pair].table

    def clamped(self) -> BellSquare:
        return BellSquare({c: s.clamped() for c, s in self.corners.items()},
                          {p: j.clamped() for p, j in self.joints.items()})


def validate_bell_square(bs: BellSquare, tol: float = EPS) -> list[Violation]:
    """Check every corner, every joint, and the eight marginal arrows.

    Violations carry ``where=(pair_or_corner, label)``.
    """
    out = []
    for c, space in bs.corners.items():
        out.extend(Violation(v.kind, v.message, (c, v.where), v.severity)
                   for v in validate_space(space, tol))
    for pair, j in bs.joints.items():
        for v in validate_joint(j, tol):
            if v.kind == "marginal":
                continue
            out.append(Violation(v.kind, v.message, (pair, v.where), v.severity))
        m_left, m_right = marginals(j)
        for name, got in ((pair[0], m_left), (pair[1], m_right)):
            want = bs.corners[name]
            for label, a, b in zip(want.labels, got.probs, want.probs):
                if not abs(a - b) <= tol:
                    out.append(Violation(
                        "marginal",
                        f"marginal of {pair} onto {name} is {a:.12g}, corner has {b:.12g}",
                        (pair, label)))
    return out


def bell_square_as_diagram(bs: BellSquare) -> Diagram:
    """The eight-node square: each joint projects onto its two corners."""
    nodes: dict[str, FinSpace] = dict(bs.corners)
    edges = []
    for pair, j in bs.joints.items():
        flat = j.as_space()
        nodes[pair] = flat
        edges.append(Edge(pair, pair[0], ProbMap(flat, bs.corners[pair[0]], lambda xy: xy[0]),
                          f"pi_{pair[0]}"))
        edges.append(Edge(pair, pair[1], ProbMap(flat, bs.corners[pair[1]], lambda xy: xy[1]),
                          f"pi_{pair[1]}"))
    return Diagram(nodes, edges)
