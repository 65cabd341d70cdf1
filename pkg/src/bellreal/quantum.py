"""Two-qubit Born-rule generation of Bell squares.

Outcome index 1 is spin up (eigenvalue +1), index 2 spin down (eigenvalue -1).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .diagram import CORNERS, PAIRS, BellSquare
from .finprob import EPS, FinSpace, JointSpace

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def unit_vector(u: Sequence[float], tol: float = EPS) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {u.shape}")
    norm = float(np.linalg.norm(u))
    if not abs(norm - 1.0) <= tol:
        raise ValueError(f"direction {u.tolist()} is not a unit vector (norm {norm:.12g})")
    return u


def spin_observable(u: Sequence[float], tol: float = EPS) -> np.ndarray:
    ux, uy, uz = unit_vector(u, tol)
    return ux * SIGMA_X + uy * SIGMA_Y + uz * SIGMA_Z


def hermitian_part(M, tol: float = EPS) -> np.ndarray:
    """``(M + M†)/2``, provided ``M`` is already hermitian within ``tol``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if np.abs(M - M.conj().T).max() > tol:
        raise ValueError("matrix is not hermitian")
    return (M + M.conj().T) / 2


def pm_projectors(M, tol: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """Spectral projectors ``(1 ± M)/2`` of a hermitian involution."""
    M = hermitian_part(M, tol)
    eye = np.eye(M.shape[0], dtype=complex)
    if np.abs(M @ M - eye).max() > tol:
        raise ValueError("observable does not square to the identity")
    if np.abs(M - eye).max() <= tol or np.abs(M + eye).max() <= tol:
        raise ValueError("observable is ±identity; one of its projectors would vanish")
    return (eye + M) / 2, (eye - M) / 2


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def validate_density(rho, tol: float = EPS) -> list[str]:
    """Problems that stop ``rho`` being a density matrix; empty if it is one."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return [f"not square: shape {rho.shape}"]
    out = []
    if np.abs(rho - rho.conj().T).max() > tol:
        out.append("not hermitian")
        return out
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        out.append(f"trace {tr.real:.12g} != 1")
    lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if lo < -tol:
        out.append(f"negative eigenvalue {lo:.6g}")
    return out


def density_matrix(rho, tol: float = EPS) -> np.ndarray:
    problems = validate_density(rho, tol)
    if problems:
        raise ValueError("invalid density matrix: " + "; ".join(problems))
    return hermitian_part(rho, tol)


def epr_state() -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    rho[1:3, 1:3] = [[0.5, -0.5], [-0.5, 0.5]]
    return rho


def maximally_mixed(dim: int = 4) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def pure_density(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def partial_trace(rho, keep: str = "first") -> np.ndarray:
    """Reduce a two-qubit state to one subsystem (``keep`` is ``"first"`` or ``"second"``)."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    if keep == "first":
        return np.einsum("ijkj->ik", r)
    if keep == "second":
        return np.einsum("jijk->ik", r)
    raise ValueError(f"keep must be 'first' or 'second', not {keep!r}")


def born_distribution(rho, proj: tuple[np.ndarray, np.ndarray], tol: float = EPS) -> np.ndarray:
    """Outcome probabilities ``Tr[ρ Π]`` for a single system."""
    p = np.array([np.trace(rho @ P) for P in proj])
    return _real_probabilities(p, tol)


def _real_probabilities(p: np.ndarray, tol: float) -> np.ndarray:
    if np.abs(p.imag).max() > tol:
        raise ValueError("Born probabilities have a non-negligible imaginary part")
    p = p.real
    if p.min() < -tol:
        raise ValueError("invalid state/measurement pair: negative probability")
    return np.maximum(p, 0.0)


def born_joint(rho, proj_a, proj_b, left: FinSpace | None = None,
               right: FinSpace | None = None, tol: float = EPS) -> JointSpace:
    """Joint outcome table ``Tr[ρ (Π_A^i ⊗ Π_B^j)]``.

    Axis spaces default to the Born marginals labelled ``a1, a2`` / ``b1, b2``.
    """
    rho = np.asarray(rho, dtype=complex)
    table = np.array([[np.trace(rho @ kron(Pa, Pb)) for Pb in proj_b] for Pa in proj_a])
    table = _real_probabilities(table, tol)
    if abs(table.sum() - 1.0) > tol:
        raise ValueError("invalid state/measurement pair: probabilities do not sum to 1")
    if left is None:
        left = FinSpace(["a1", "a2"], table.sum(axis=1))
    if right is None:
        right = FinSpace(["b1", "b2"], table.sum(axis=0))
    return JointSpace(left, right, table)


def build_quantum_bell_square(rho, uQ, uR, uS, uT, tol: float = EPS) -> BellSquare:
    """Bell square for spin measurements Q, R on the first qubit and S, T on the second."""
    rho = density_matrix(rho, tol)
    if rho.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) state")
    dirs = dict(zip(CORNERS, (uQ, uR, uS, uT)))
    proj = {c: pm_projectors(spin_observable(u, tol), tol) for c, u in dirs.items()}
    reduced = {"Q": partial_trace(rho, "first"), "R": partial_trace(rho, "first"),
               "S": partial_trace(rho, "second"), "T": partial_trace(rho, "second")}
    corners = {
        c: FinSpace([f"{c.lower()}1", f"{c.lower()}2"], born_distribution(reduced[c], proj[c], tol))
        for c in CORNERS
    }
    joints = {p: born_joint(rho, proj[p[0]], proj[p[1]], corners[p[0]], corners[p[1]], tol)
              for p in PAIRS}
    return BellSquare(corners, joints)


# Directions of the standard maximally violating scenario.
EPR_DIRECTIONS = {
    "Q": (0.0, 0.0, 1.0),
    "R": (1.0, 0.0, 0.0),
    "S": (-1 / np.sqrt(2), 0.0, -1 / np.sqrt(2)),
    "T": (-1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)),
}


def epr_bell_square() -> BellSquare:
    d = EPR_DIRECTIONS
    return build_quantum_bell_square(epr_state(), d["Q"], d["R"], d["S"], d["T"])
