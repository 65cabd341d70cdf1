import numpy as np
import pytest

from bellreal import BellSquare, FinSpace, MultiJoint
from bellreal.diagram import CORNERS, PAIRS

R2 = np.sqrt(2.0)
A = 1 / (8 - 4 * R2)            # ≈ 0.4268
B = 1 / (8 + 4 * R2)            # ≈ 0.0732

# Closed-form joint tables of the singlet measured along the reference directions (rows: first-named corner).
EPR_TABLES = {
    "QS": np.array([[A, B], [(1 - R2) ** 2 * A, (1 + R2) ** 2 * B]]),
    "RS": np.array([[A, B], [(3 - 2 * R2) * A, (3 + 2 * R2) * B]]),
    "RT": np.array([[(3 + 2 * R2) * B, (3 - 2 * R2) * A], [B, A]]),
    "QT": np.array([[B, A], [(1 + R2) ** 2 * B, (1 - R2) ** 2 * A]]),
}


def reference_square() -> BellSquare:
    return BellSquare.from_joint_tables(EPR_TABLES)


@pytest.fixture
def epr_square():
    return reference_square()


def random_space(rng, n, prefix="x", zero_prob=0.0):
    p = rng.dirichlet(np.ones(n))
    if zero_prob:
        p = np.where(rng.random(n) < zero_prob, 0.0, p)
        if p.sum() == 0:
            p[0] = 1.0
        p = p / p.sum()
    return FinSpace([f"{prefix}{i + 1}" for i in range(n)], p)


def random_global(rng, sizes=(2, 2, 2, 2), sparse=False):
    axes = [FinSpace([f"{c.lower()}{i + 1}" for i in range(n)], np.full(n, 1 / n))
            for c, n in zip(CORNERS, sizes)]
    t = rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes)
    if sparse:
        t = t * (rng.random(sizes) < 0.4)
        if t.sum() == 0:
            t.flat[0] = 1.0
        t = t / t.sum()
    return MultiJoint(axes, t)


def square_from_global(g) -> BellSquare:
    """Marginalize a hidden-variable table to its four observable pairs."""
    from bellreal.localreal import PAIR_AXES
    tables = {p: g.marginal(*PAIR_AXES[p]) for p in PAIRS}
    labels = {c: a.labels for c, a in zip(CORNERS, g.axes)}
    return BellSquare.from_joint_tables(tables, labels)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
