"""Dense phase-one simplex for ``A x = b, x >= 0`` feasibility.

One artificial variable is attached to every equality row and their total is
minimised with Bland's rule, so redundant rows need no preprocessing. The
final reduced costs of the artificial columns give the phase-one duals, which
form a Farkas certificate when the optimum is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalFailure(RuntimeError):
    """The simplex did not terminate cleanly, or produced an unsound answer."""


@dataclass(frozen=True)
class PhaseOneResult:
    x: np.ndarray          # structural variables at termination
    objective: float       # total artificial mass left
    duals: np.ndarray      # y with y @ A <= 0 and y @ b == objective
    iterations: int
    basis: tuple[int, ...]


def phase_one(A, b, max_iter: int | None = None, pivot_tol: float = 1e-12) -> PhaseOneResult:
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"b has shape {b.shape}, expected ({m},)")
    if max_iter is None:
        max_iter = 10 * ((n + m) + m)

    # rows with negative right-hand side are negated so artificials start feasible
    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    # reduced costs: c_j - c_B B^-1 a_j with c = (0, 1); last cell holds -objective
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    it = 0
    while True:
        cost = T[m, :-1]
        candidates = np.flatnonzero(cost < -pivot_tol)
        if candidates.size == 0:
            break
        if it >= max_iter:
            raise NumericalFailure(f"numerical failure: simplex exceeded {max_iter} iterations")
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > pivot_tol)
        if rows.size == 0:
            # phase one is bounded below by 0, so this only happens through roundoff
            raise NumericalFailure("numerical failure: unbounded phase-one direction")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + pivot_tol * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))

        T[r] /= T[r, j]
        for i in range(m + 1):
            if i != r and T[i, j] != 0.0:
                T[i] -= T[i, j] * T[r]
        basis[r] = j
        it += 1

    values = np.zeros(n + m)
    values[basis] = T[:m, -1]
    duals = (1.0 - T[m, n:n + m]) * flip
    return PhaseOneResult(
        x=values[:n].copy(),
        objective=float(values[n:].sum()),
        duals=duals,
        iterations=it,
        basis=tuple(basis),
    )
