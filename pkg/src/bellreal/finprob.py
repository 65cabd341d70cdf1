"""Finite probability spaces, probability-preserving maps, joints and random variables.

Every type here is an immutable value. Construction only checks shapes; the
probabilistic invariants (unit mass, the morphism condition, marginal
consistency) are checked by the ``validate_*`` functions, which return a list
of :class:`Violation` records instead of raising.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

#: Default absolute tolerance for every invariant check.
EPS = 1e-9

Label = Hashable


@dataclass(frozen=True)
class Violation:
    """One failed invariant. ``severity`` is ``"error"`` or ``"warning"``."""

    kind: str
    message: str
    where: object = None
    severity: str = "error"

    def __str__(self) -> str:
        loc = "" if self.where is None else f" [{self.where}]"
        return f"{self.severity}: {self.kind}{loc}: {self.message}"


def errors(violations: Sequence[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FinSpace:
    """A finite outcome set with a probability vector, indexed positionally."""

    labels: tuple
    probs: np.ndarray

    def __init__(self, labels: Sequence[Label], probs: Sequence[float]):
        labels = tuple(labels)
        probs = _frozen(probs)
        if probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if len(labels) != len(probs):
            raise ValueError(f"{len(labels)} labels but {len(probs)} probabilities")
        if not labels:
            raise ValueError("a finite probability space needs at least one outcome")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int, prefix: str = "x") -> FinSpace:
        return cls([f"{prefix}{i + 1}" for i in range(n)], np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, labels: Sequence[Label], at: Label) -> FinSpace:
        labels = tuple(labels)
        probs = np.zeros(len(labels))
        probs[labels.index(at)] = 1.0
        return cls(labels, probs)

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.probs, other.probs)

    __hash__ = None  # type: ignore[assignment]

    def index(self, label: Label) -> int:
        return self.labels.index(label)

    def prob(self, label: Label) -> float:
        return float(self.probs[self.index(label)])

    def close_to(self, other: FinSpace, tol: float = EPS) -> bool:
        return (
            self.labels == other.labels
            and bool(np.all(np.abs(self.probs - other.probs) <= tol))
        )

    def clamped(self) -> FinSpace:
        """Copy with negative entries set to zero (use after :func:`validate_space`)."""
        return FinSpace(self.labels, np.maximum(self.probs, 0.0))

    def __repr__(self) -> str:
        pairs = ", ".join(f"{l!r}: {p:.6g}" for l, p in zip(self.labels, self.probs))
        return f"FinSpace({{{pairs}}})"


def _check_probability_vector(probs: np.ndarray, tol: float, what: str) -> list[Violation]:
    out = []
    flat = probs.ravel()
    for i, p in enumerate(flat):
        where = np.unravel_index(i, probs.shape) if probs.ndim > 1 else i
        if not np.isfinite(p):
            out.append(Violation("not-finite", f"{what} entry is {p}", where))
        elif p < -tol:
            out.append(Violation("negative", f"{what} entry {p:.6g} < 0", where))
        elif p < 0:
            out.append(Violation("negative-zero", f"{what} entry {p:.3g} clamped to 0",
                                 where, severity="warning"))
        elif p > 1 + tol:
            out.append(Violation("above-one", f"{what} entry {p:.6g} > 1", where))
    mass = float(flat.sum())
    if not abs(mass - 1.0) <= tol:
        out.append(Violation("mass", f"{what} mass {mass:.12g} != 1"))
    return out


def validate_space(s: FinSpace, tol: float = EPS) -> list[Violation]:
    """Report every violated invariant of ``s``; an empty list means valid.

    Entries in ``[-tol, 0)`` are reported as warnings only.
    """
    out = []
    if len(set(s.labels)) != len(s.labels):
        seen = set()
        for i, l in enumerate(s.labels):
            if l in seen:
                out.append(Violation("duplicate-label", f"label {l!r} repeated", i))
            seen.add(l)
    out.extend(_check_probability_vector(s.probs, tol, "probability"))
    return out


# -- morphisms ---------------------------------------------------------------

OutcomeMap = Mapping[Label, Label] | Callable[[Label], Label]


def _as_table(f: OutcomeMap, labels: Sequence[Label]) -> dict:
    if callable(f) and not isinstance(f, Mapping):
        return {x: f(x) for x in labels}
    missing = [x for x in labels if x not in f]
    if missing:
        raise KeyError(f"outcome map undefined on {missing!r}")
    return {x: f[x] for x in labels}


def pushforward(f: OutcomeMap, s: FinSpace, target_labels: Sequence[Label] | None = None) -> FinSpace:
    """Distribution induced on the image of ``f``: fiber sums of ``s``.

    Target labels default to the image in first-seen order; pass
    ``target_labels`` to fix the codomain (outcomes outside the image get 0).
    """
    table = _as_table(f, s.labels)
    if target_labels is None:
        target_labels = list(dict.fromkeys(table.values()))
    target_labels = tuple(target_labels)
    pos = {y: i for i, y in enumerate(target_labels)}
    probs = np.zeros(len(target_labels))
    for x, p in zip(s.labels, s.probs):
        y = table[x]
        if y not in pos:
            raise KeyError(f"{x!r} maps to {y!r}, which is not a target label")
        probs[pos[y]] += p
    return FinSpace(target_labels, probs)


@dataclass(frozen=True, eq=False)
class ProbMap:
    """A function between outcome sets, claimed to preserve probability."""

    source: FinSpace
    target: FinSpace
    table: Mapping[Label, Label]

    def __init__(self, source: FinSpace, target: FinSpace, f: OutcomeMap):
        table = _as_table(f, source.labels)
        allowed = set(target.labels)
        bad = {x: y for x, y in table.items() if y not in allowed}
        if bad:
            raise KeyError(f"outcomes mapped outside the target: {bad!r}")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "table", table)

    def __call__(self, x: Label) -> Label:
        return self.table[x]

    def then(self, g: ProbMap) -> ProbMap:
        """Composite ``g ∘ self``."""
        return ProbMap(self.source, g.target, {x: g.table[y] for x, y in self.table.items()})


def is_morphism(f: OutcomeMap, s: FinSpace, t: FinSpace, tol: float = EPS) -> bool:
    try:
        image = pushforward(f, s, t.labels)
    except KeyError:
        return False
    return image.close_to(t, tol)


def morphism_violations(h: ProbMap, tol: float = EPS) -> list[Violation]:
    image = pushforward(h.table, h.source, h.target.labels)
    out = []
    for y, got, want in zip(h.target.labels, image.probs, h.target.probs):
        if not abs(got - want) <= tol:
            out.append(Violation("morphism", f"fiber mass {got:.12g} != target {want:.12g}", y))
    return out


# -- joints ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointSpace:
    """A joint distribution on ``left.labels × right.labels`` (rows × columns)."""

    left: FinSpace
    right: FinSpace
    table: np.ndarray

    def __init__(self, left: FinSpace, right: FinSpace, table):
        table = _frozen(table)
        if table.shape != (len(left), len(right)):
            raise ValueError(f"table shape {table.shape} != {(len(left), len(right))}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "table", table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointSpace):
            return NotImplemented
        return (self.left == other.left and self.right == other.right
                and np.array_equal(self.table, other.table))

    __hash__ = None  # type: ignore[assignment]

    def transpose(self) -> JointSpace:
        return JointSpace(self.right, self.left, self.table.T)

    def as_space(self) -> FinSpace:
        """The joint as a flat space with ``(x, y)`` tuple labels, row-major."""
        labels = [(x, y) for x in self.left.labels for y in self.right.labels]
        return FinSpace(labels, self.table.ravel())

    def projections(self) -> tuple[ProbMap, ProbMap]:
        flat = self.as_space()
        return (ProbMap(flat, self.left, lambda xy: xy[0]),
                ProbMap(flat, self.right, lambda xy: xy[1]))

    def clamped(self) -> JointSpace:
        return JointSpace(self.left.clamped(), self.right.clamped(),
                          np.maximum(self.table, 0.0))


def marginals(j: JointSpace) -> tuple[FinSpace, FinSpace]:
    """Row and column sums of ``j``, labelled like its two axes."""
    return (FinSpace(j.left.labels, j.table.sum(axis=1)),
            FinSpace(j.right.labels, j.table.sum(axis=0)))


def validate_joint(j: JointSpace, tol: float = EPS) -> list[Violation]:
    out = _check_probability_vector(j.table, tol, "joint")
    m_left, m_right = marginals(j)
    for side, got, want in (("left", m_left, j.left), ("right", m_right, j.right)):
        for label, a, b in zip(want.labels, got.probs, want.probs):
            if not abs(a - b) <= tol:
                out.append(Violation("marginal", f"{side} marginal {a:.12g} != {b:.12g}", label))
    return out


def product(a: FinSpace, b: FinSpace) -> JointSpace:
    return JointSpace(a, b, np.outer(a.probs, b.probs))


# -- random variables --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RandomVar:
    """A real value attached to each outcome of ``space``."""

    space: FinSpace
    values: np.ndarray

    def __init__(self, space: FinSpace, values):
        if isinstance(values, Mapping):
            missing = [l for l in space.labels if l not in values]
            if missing or len(values) != len(space):
                raise ValueError(f"values must cover exactly the space's labels; missing {missing!r}")
            values = [values[l] for l in space.labels]
        values = _frozen(values)
        if values.shape != (len(space),):
            raise ValueError(f"{values.shape[0] if values.ndim else 0} values for {len(space)} outcomes")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", values)

    def __call__(self, x: Label) -> float:
        return float(self.values[self.space.index(x)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RandomVar):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


def expectation(x: RandomVar) -> float:
    return float(np.dot(x.values, x.space.probs))


def pullback(h: ProbMap, x: RandomVar) -> RandomVar:
    """Random variable ``x ∘ h`` on ``h.source``."""
    if x.space.labels != h.target.labels:
        raise ValueError("random variable is not defined on the map's target")
    pos = {y: i for i, y in enumerate(h.target.labels)}
    return RandomVar(h.source, [x.values[pos[h.table[w]]] for w in h.source.labels])


# -- many-axis joints --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MultiJoint:
    """A distribution on the product of several axis spaces, one array axis each."""

    axes: tuple
    table: np.ndarray = field(repr=False)

    def __init__(self, axes: Sequence[FinSpace], table):
        axes = tuple(axes)
        table = _frozen(table)
        shape = tuple(len(a) for a in axes)
        if table.shape != shape:
            raise ValueError(f"table shape {table.shape} != {shape}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", table)

    @classmethod
    def product_of(cls, axes: Sequence[FinSpace]) -> MultiJoint:
        table = np.ones(())
        for a in axes:
            table = np.multiply.outer(table, a.probs)
        return cls(axes, table)

    def marginal(self, *keep: int) -> np.ndarray:
        """Marginal table over the axes ``keep``, in that order."""
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        m = self.table.sum(axis=drop)
        order = sorted(keep)
        return np.transpose(m, [order.index(k) for k in keep])

    def axis_space(self, i: int) -> FinSpace:
        return FinSpace(self.axes[i].labels, self.marginal(i))

    def joint(self, i: int, k: int) -> JointSpace:
        return JointSpace(self.axes[i], self.axes[k], self.marginal(i, k))

    def as_space(self) -> FinSpace:
        labels = list(itertools.product(*(a.labels for a in self.axes)))
        return FinSpace(labels, self.table.ravel())


def validate_multijoint(g: MultiJoint, tol: float = EPS) -> list[Violation]:
    return _check_probability_vector(g.table, tol, "joint")
