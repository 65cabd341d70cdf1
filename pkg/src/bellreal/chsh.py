"""CHSH expressions over Bell squares with ±1-valued random variables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import CORNERS, PAIRS, BellSquare
from .finprob import EPS, JointSpace, RandomVar, expectation

CLASSICAL_BOUND = 2.0
MAX_CORNER_SIZE = 12


class DichotomicRV(RandomVar):
    """A random variable taking only the values -1 and +1."""

    def __init__(self, space, values):
        super().__init__(space, values)
        if not np.all(np.abs(self.values) == 1.0):
            raise ValueError(f"dichotomic variable has values outside {{-1, +1}}: {self.values}")


def product_rv(x: RandomVar, y: RandomVar, j: JointSpace) -> RandomVar:
    """``(a, b) ↦ x(a) y(b)`` on the flattened joint ``j``."""
    if x.space.labels != j.left.labels or y.space.labels != j.right.labels:
        raise ValueError("random variables do not live on the joint's axes")
    return RandomVar(j.as_space(), np.outer(x.values, y.values).ravel())


@dataclass(frozen=True, eq=False)
class ChshAssignment:
    Q: DichotomicRV
    R: DichotomicRV
    S: DichotomicRV
    T: DichotomicRV
    minus: str = "QT"

    def __post_init__(self):
        if self.minus not in PAIRS:
            raise ValueError(f"minus position must be one of {PAIRS}, not {self.minus!r}")

    @classmethod
    def from_signs(cls, bs: BellSquare, signs, minus: str = "QT") -> ChshAssignment:
        return cls(*(DichotomicRV(bs.corners[c], signs[c]) for c in CORNERS), minus=minus)

    @classmethod
    def alternating(cls, bs: BellSquare, minus: str = "QT") -> ChshAssignment:
        """``+1`` on the first outcome, ``-1`` on the second, and so on."""
        return cls.from_signs(
            bs, {c: [(-1.0) ** i for i in range(len(bs.corners[c]))] for c in CORNERS}, minus)

    def var(self, corner: str) -> DichotomicRV:
        return getattr(self, corner)

    def signs(self) -> dict[str, list[int]]:
        return {c: [int(v) for v in self.var(c).values] for c in CORNERS}


def term_expectations(bs: BellSquare, a: ChshAssignment) -> dict[str, float]:
    out = {}
    for pair in PAIRS:
        x, y = a.var(pair[0]), a.var(pair[1])
        if x.space.labels != bs.corners[pair[0]].labels or y.space.labels != bs.corners[pair[1]].labels:
            raise ValueError(f"assignment does not match the corners of pair {pair}")
        out[pair] = expectation(product_rv(x, y, bs.joints[pair]))
    return out


def chsh_value(bs: BellSquare, a: ChshAssignment) -> float:
    """Sum of the four product expectations, with ``a.minus`` subtracted."""
    terms = term_expectations(bs, a)
    return sum(-v if p == a.minus else v for p, v in terms.items())


def is_violation(bs: BellSquare, a: ChshAssignment, tol: float = EPS) -> bool:
    return chsh_value(bs, a) > CLASSICAL_BOUND + tol


def _sign_rows(n: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop`` of all ±1 vectors of length ``n`` in lexicographic order (-1 < +1)."""
    k = np.arange(start, stop)[:, None]
    bits = (k >> np.arange(n - 1, -1, -1)) & 1
    return 2.0 * bits - 1.0


def max_chsh(bs: BellSquare, chunk: int = 1 << 14) -> tuple[float, ChshAssignment]:
    """Largest CHSH value over every sign assignment and every minus position.

    Alice's signs (Q then R) are enumerated; for each one Bob's best response
    is chosen outcome by outcome, which is exact because the expression is
    separable in Bob's signs. Ties resolve to the lexicographically smallest
    (Q, R, S, T) sign vector with -1 before +1, then to the earlier minus
    position in ``PAIRS`` order.
    """
    nQ, nR, nS, nT = bs.shape()
    if max(bs.shape()) > MAX_CORNER_SIZE:
        raise ValueError("search space too large")
    M = {p: bs.table(p) for p in PAIRS}
    n_alice = nQ + nR
    tie = 1e-12
    found = []

    for minus in PAIRS:
        sg = {p: (-1.0 if p == minus else 1.0) for p in PAIRS}
        best_val, best = -np.inf, None
        for start in range(0, 1 << n_alice, chunk):
            rows = _sign_rows(n_alice, start, min(start + chunk, 1 << n_alice))
            xq, xr = rows[:, :nQ], rows[:, nQ:]
            # coefficient of each of Bob's signs, per Alice assignment
            cs = sg["QS"] * xq @ M["QS"] + sg["RS"] * xr @ M["RS"]
            ct = sg["QT"] * xq @ M["QT"] + sg["RT"] * xr @ M["RT"]
            vals = np.abs(cs).sum(axis=1) + np.abs(ct).sum(axis=1)
            # rows are in lexicographic order, so the first near-maximum is the smallest
            i = int(np.flatnonzero(vals >= vals.max() - tie)[0])
            if vals[i] > best_val + tie:
                xs = np.where(cs[i] > tie, 1.0, -1.0)
                xt = np.where(ct[i] > tie, 1.0, -1.0)
                best_val = float(vals[i])
                best = np.concatenate([xq[i], xr[i], xs, xt])
        found.append((best_val, tuple(best), minus))

    top = max(v for v, _, _ in found)
    _, vec, minus = min((f for f in found if f[0] >= top - tie),
                        key=lambda f: (f[1], PAIRS.index(f[2])))
    cuts = np.cumsum([nQ, nR, nS])
    parts = np.split(np.array(vec), cuts)
    a = ChshAssignment.from_signs(bs, dict(zip(CORNERS, parts)), minus)
    return chsh_value(bs, a), a
