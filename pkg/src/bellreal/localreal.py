"""Local realizations of Bell squares.

A local realization is searched for on the product of the four corner sample
spaces, with the canonical projections as the maps of the extended diagram.
Feasibility of the resulting linear system is decided by :mod:`bellreal.simplex`;
when it fails, the phase-one duals become a Bell-inequality certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .diagram import (
    CORNERS,
    PAIRS,
    BellSquare,
    Diagram,
    Edge,
    bell_square_as_diagram,
    check_commutes,
    validate_bell_square,
    validate_diagram,
)
from .finprob import (
    EPS,
    FinSpace,
    JointSpace,
    MultiJoint,
    ProbMap,
    Violation,
    errors,
    validate_multijoint,
)
from .simplex import NumericalFailure, phase_one

#: Phase-one optimum at or below this counts as feasible.
LP_TOL = 1e-7

#: Axis positions of each pair inside a Q, R, S, T indexed table.
PAIR_AXES = {p: (CORNERS.index(p[0]), CORNERS.index(p[1])) for p in PAIRS}

GlobalJoint = MultiJoint


def global_joint(bs: BellSquare, table) -> GlobalJoint:
    return MultiJoint([bs.corners[c] for c in CORNERS], table)


@dataclass(frozen=True, eq=False)
class InfeasibilityCertificate:
    """Weights on the cells of the four joints with ``observed > bound``.

    Every deterministic outcome tuple ``(q, r, s, t)`` scores at most
    ``bound``, while the square's own tables score ``observed``.
    """

    weights: Mapping[str, np.ndarray]
    bound: float
    observed: float

    @property
    def gap(self) -> float:
        return self.observed - self.bound


@dataclass(frozen=True, eq=False)
class RealizationResult:
    joint: GlobalJoint | None = None
    certificate: InfeasibilityCertificate | None = None
    phase_one_objective: float = 0.0

    def __post_init__(self):
        if (self.joint is None) == (self.certificate is None):
            raise ValueError("exactly one of joint and certificate must be set")

    @property
    def feasible(self) -> bool:
        return self.joint is not None

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "infeasible"


def marginal_system(bs: BellSquare) -> tuple[np.ndarray, np.ndarray]:
    """Equality system ``A p = b`` over the flattened Q×R×S×T table.

    Rows run over the pairs in ``PAIRS`` order and then over each joint's
    cells row-major; ``b`` is the concatenated joint tables.
    """
    shape = bs.shape()
    n = int(np.prod(shape))
    idx = np.arange(n).reshape(shape)
    rows = []
    for pair in PAIRS:
        a, c = PAIR_AXES[pair]
        for i in range(shape[a]):
            for k in range(shape[c]):
                sl = [slice(None)] * 4
                sl[a], sl[c] = i, k
                row = np.zeros(n)
                row[idx[tuple(sl)].ravel()] = 1.0
                rows.append(row)
    b = np.concatenate([bs.table(p).ravel() for p in PAIRS])
    return np.array(rows), b


def _split_weights(bs: BellSquare, y: np.ndarray) -> dict[str, np.ndarray]:
    out, pos = {}, 0
    for pair in PAIRS:
        shape = bs.table(pair).shape
        size = shape[0] * shape[1]
        out[pair] = y[pos:pos + size].reshape(shape)
        pos += size
    return out


def tuple_scores(bs: BellSquare, weights: Mapping[str, np.ndarray]) -> np.ndarray:
    """Certificate score of every deterministic tuple, as a Q×R×S×T array.

    Enumerates each tuple explicitly; this is the brute-force check, kept
    separate from the linear algebra that produced the weights.
    """
    shape = bs.shape()
    scores = np.empty(shape)
    for tup in itertools.product(*(range(k) for k in shape)):
        scores[tup] = sum(weights[p][tup[PAIR_AXES[p][0]], tup[PAIR_AXES[p][1]]] for p in PAIRS)
    return scores


def observed_score(bs: BellSquare, weights: Mapping[str, np.ndarray]) -> float:
    return float(sum(np.sum(weights[p] * bs.table(p)) for p in PAIRS))


def _certificate_from_duals(bs: BellSquare, y: np.ndarray) -> InfeasibilityCertificate:
    weights = _split_weights(bs, y)
    scale = max(np.abs(w).max() for w in weights.values())
    if scale > 0:
        weights = {p: w / scale for p, w in weights.items()}
    weights = {p: _readonly(w) for p, w in weights.items()}
    bound = float(tuple_scores(bs, weights).max())
    return InfeasibilityCertificate(weights, bound, observed_score(bs, weights))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def find_local_realization(bs: BellSquare, tol: float = LP_TOL, eps: float = EPS,
                           max_iter: int | None = None,
                           try_product: bool = True) -> RealizationResult:
    """Decide whether ``bs`` has a local realization.

    Returns the hidden-variable table on Q×R×S×T when one exists; otherwise a
    certificate that has already passed :func:`verify_certificate`. With
    ``try_product`` the product of the corners is returned whenever it
    verifies (every joint is a product), before any LP is solved.

    Raises ``ValueError`` for an invalid square and
    :class:`~bellreal.simplex.NumericalFailure` if the solver misbehaves.
    """
    bad = errors(validate_bell_square(bs, eps))
    if bad:
        raise ValueError("invalid Bell square: " + "; ".join(map(str, bad)))
    bs = bs.clamped()
    if try_product:
        g = realization_product(*(bs.corners[c] for c in CORNERS))
        if not errors(verify_realization(bs, g, tol)):
            return RealizationResult(joint=g)
    A, b = marginal_system(bs)
    res = phase_one(A, b, max_iter=max_iter)

    if res.objective <= tol:
        p = np.maximum(res.x, 0.0)
        p /= p.sum()
        g = global_joint(bs, p.reshape(bs.shape()))
        if errors(verify_realization(bs, g, tol)):
            raise NumericalFailure("numerical failure: phase-one solution does not verify")
        return RealizationResult(joint=g, phase_one_objective=res.objective)

    cert = _certificate_from_duals(bs, res.duals)
    if verify_certificate(bs, cert, eps):
        raise NumericalFailure("numerical failure: phase-one duals are not a valid certificate")
    return RealizationResult(certificate=cert, phase_one_objective=res.objective)


def _canonical_projection(source: FinSpace, pair: str, target: FinSpace) -> ProbMap:
    a, c = PAIR_AXES[pair]
    return ProbMap(source, target, lambda w: (w[a], w[c]))


def local_realization_diagram(bs: BellSquare, g: GlobalJoint) -> Diagram:
    """The Bell square plus the hidden-variable space mapping onto each joint."""
    square = bell_square_as_diagram(bs)
    nodes = dict(square.nodes)
    nodes["Omega"] = g.as_space()
    edges = list(square.edges)
    for pair in PAIRS:
        edges.append(Edge("Omega", pair, _canonical_projection(nodes["Omega"], pair, nodes[pair]),
                          f"pi_{pair}"))
    return Diagram(nodes, edges)


def verify_realization(bs: BellSquare, g: GlobalJoint, tol: float = LP_TOL) -> list[Violation]:
    """Check the extended diagram: every arrow preserves probability and it commutes.

    Marginal mismatches are reported with ``where=(pair, cell label)``.
    """
    if g.table.shape != bs.shape():
        return [Violation("shape", f"joint shape {g.table.shape} != square shape {bs.shape()}")]
    out = list(validate_multijoint(g, tol))
    d = local_realization_diagram(bs, g)
    for v in validate_diagram(d, tol):
        edge, cell = v.where
        if edge.startswith("pi_") and len(edge) == 5:
            out.append(Violation("marginal", f"pair {edge[3:]}: {v.message}", (edge[3:], cell)))
        elif edge.startswith("pi_"):
            # projections inside the square itself; the square is assumed validated
            out.append(Violation("square", v.message, v.where))
        else:
            out.append(v)
    report = check_commutes(d)
    out.extend(Violation("commutes", str(f)) for f in report.failures)
    return out


def verify_certificate(bs: BellSquare, c: InfeasibilityCertificate,
                       tol: float = EPS) -> list[Violation]:
    """Re-check a certificate by brute force."""
    out = []
    for pair in PAIRS:
        if np.shape(c.weights.get(pair)) != bs.table(pair).shape:
            return [Violation("shape", f"weights for {pair} do not match the joint table")]
    scores = tuple_scores(bs, c.weights)
    worst = float(scores.max())
    if worst > c.bound + tol:
        tup = np.unravel_index(int(scores.argmax()), scores.shape)
        labels = tuple(bs.corners[k].labels[i] for k, i in zip(CORNERS, tup))
        out.append(Violation("bound", f"deterministic tuple scores {worst:.12g} > bound "
                                      f"{c.bound:.12g}", labels))
    observed = observed_score(bs, c.weights)
    if not abs(observed - c.observed) <= tol:
        out.append(Violation("observed", f"recomputed observed {observed:.12g} != "
                                         f"stated {c.observed:.12g}"))
    if not observed > c.bound + tol:
        out.append(Violation("gap", f"observed not > bound ({observed:.12g} <= {c.bound:.12g})"))
    return out


def chsh_certificate(bs: BellSquare, signs: Mapping[str, np.ndarray],
                     minus: str = "QT") -> InfeasibilityCertificate:
    """Encode a CHSH expression as cell weights with the classical bound 2."""
    weights = {}
    for pair in PAIRS:
        w = np.outer(signs[pair[0]], signs[pair[1]]).astype(float)
        weights[pair] = _readonly(-w if pair == minus else w)
    return InfeasibilityCertificate(weights, 2.0, observed_score(bs, weights))


# -- locality alone and realism alone ---------------------------------------

def locality_extension(j1: JointSpace, j2: JointSpace, tol: float = EPS) -> MultiJoint:
    """Couple two joints sharing their left axis, conditionally independently.

    ``μ(x, y, z) = μ1(x, y) μ2(x, z) / μ(x)`` on the shared axis ``x``, and 0
    where ``μ(x) = 0``. Transpose a joint first if the shared corner is on its
    columns.
    """
    shared = j1.left
    if j2.left.labels != shared.labels or not j2.left.close_to(shared, tol):
        raise ValueError("the two joints do not share their left marginal")
    m1 = j1.table.sum(axis=1)
    m2 = j2.table.sum(axis=1)
    if np.any(np.abs(m1 - m2) > tol):
        raise ValueError("the two joints have different marginals on the shared axis")
    mu = shared.probs
    inv = np.divide(1.0, mu, out=np.zeros_like(mu), where=mu > 0)
    table = np.einsum("xy,xz,x->xyz", j1.table, j2.table, inv)
    return MultiJoint([shared, j1.right, j2.right], table)


def _joint_for_corner(bs: BellSquare, corner: str, pair: str) -> JointSpace:
    j = bs.joints[pair]
    return j if pair[0] == corner else j.transpose()


def locality_pairs(corner: str) -> tuple[str, str]:
    return tuple(p for p in PAIRS if corner in p)  # type: ignore[return-value]


def corner_locality_extension(bs: BellSquare, corner: str, tol: float = EPS) -> MultiJoint:
    """Locality extension at one corner; axes are (corner, other of pair 1, other of pair 2)."""
    p1, p2 = locality_pairs(corner)
    return locality_extension(_joint_for_corner(bs, corner, p1),
                              _joint_for_corner(bs, corner, p2), tol)


def locality_diagram(bs: BellSquare, corner: str, ext: MultiJoint) -> Diagram:
    """Extension → the two joints through ``corner`` → ``corner``."""
    p1, p2 = locality_pairs(corner)
    flat = ext.as_space()
    nodes = {"ext": flat, corner: bs.corners[corner]}
    edges = []
    for which, pair in ((1, p1), (2, p2)):
        j = bs.joints[pair]
        node = j.as_space()
        nodes[pair] = node
        first = pair[0] == corner
        # ext labels are (corner, other1, other2); joint labels keep pair order
        fn = ((lambda w, k=which: (w[0], w[k])) if first
              else (lambda w, k=which: (w[k], w[0])))
        edges.append(Edge("ext", pair, ProbMap(flat, node, fn), f"pi_{pair}"))
        pos = 0 if first else 1
        edges.append(Edge(pair, corner, ProbMap(node, bs.corners[corner],
                                                lambda xy, i=pos: xy[i]), f"pi_{corner}"))
    return Diagram(nodes, edges)


def realization_product(cQ: FinSpace, cR: FinSpace, cS: FinSpace, cT: FinSpace) -> GlobalJoint:
    """Product of the four corners: a realism-only common extension."""
    return MultiJoint.product_of([cQ, cR, cS, cT])


def realism_diagram(bs: BellSquare, g: GlobalJoint) -> Diagram:
    """The Bell square plus a space mapping directly onto the four corners."""
    square = bell_square_as_diagram(bs)
    nodes = dict(square.nodes)
    nodes["Omega"] = g.as_space()
    edges = list(square.edges)
    for i, c in enumerate(CORNERS):
        edges.append(Edge("Omega", c, ProbMap(nodes["Omega"], bs.corners[c],
                                               lambda w, i=i: w[i]), f"pi_{c}"))
    return Diagram(nodes, edges)
